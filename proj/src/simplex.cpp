#include "jcedkit/simplex.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "jcedkit/error.hpp"

namespace jced {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    case LpStatus::TimeLimit: return "time_limit";
    case LpStatus::Numerical: return "numerical";
  }
  return "?";
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

double pow2_round(double v) { return std::exp2(std::round(std::log2(v))); }

}  // namespace

struct LpSolver::Impl {
  SimplexOptions opt;
  int m = 0, n = 0, N = 0;
  // Scaled structural matrix in compressed columns.
  std::vector<int> cp, ri;
  std::vector<double> cv;
  std::vector<double> row_scale, col_scale;
  std::vector<double> cost;  // scaled, size N (logicals 0)
  std::vector<double> lb, ub;
  double offset = 0.0;

  std::vector<signed char> st;
  std::vector<double> x;
  std::vector<int> head;  // basic column per basis position
  std::vector<int> pos;   // basis position per column, -1 if nonbasic

  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  bool factored = false;
  struct Eta {
    int r;
    Vec col;
  };
  std::vector<Eta> etas;

  long iters = 0;
  int degenerate_run = 0;
  bool xb_valid = false;

  // ---- setup -------------------------------------------------------------

  void load(const CanonicalProgram& src) {
    CanonicalProgram p = src;
    if (!p.assembled()) p.assemble();
    m = p.num_rows();
    n = p.num_vars();
    N = n + m;
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (const auto& t : p.triplets) cols[t.col].emplace_back(t.row, t.val);

    row_scale.assign(m, 1.0);
    col_scale.assign(n, 1.0);
    if (opt.scale) {
      for (int pass = 0; pass < 6; ++pass) {
        std::vector<double> rmin(m, kInf), rmax(m, 0.0);
        for (int j = 0; j < n; ++j) {
          for (const auto& [i, v] : cols[j]) {
            const double a = std::abs(v) * row_scale[i] * col_scale[j];
            rmin[i] = std::min(rmin[i], a);
            rmax[i] = std::max(rmax[i], a);
          }
        }
        for (int i = 0; i < m; ++i) {
          if (rmax[i] > 0.0) row_scale[i] /= std::sqrt(rmin[i] * rmax[i]);
        }
        for (int j = 0; j < n; ++j) {
          double lo = kInf, hi = 0.0;
          for (const auto& [i, v] : cols[j]) {
            const double a = std::abs(v) * row_scale[i] * col_scale[j];
            lo = std::min(lo, a);
            hi = std::max(hi, a);
          }
          if (hi > 0.0) col_scale[j] /= std::sqrt(lo * hi);
        }
      }
      for (auto& s : row_scale) s = pow2_round(s);
      for (auto& s : col_scale) s = pow2_round(s);
    }

    cp.assign(n + 1, 0);
    ri.clear();
    cv.clear();
    for (int j = 0; j < n; ++j) {
      for (const auto& [i, v] : cols[j]) {
        ri.push_back(i);
        cv.push_back(v * row_scale[i] * col_scale[j]);
      }
      cp[j + 1] = static_cast<int>(ri.size());
    }
    cost.assign(N, 0.0);
    lb.assign(N, 0.0);
    ub.assign(N, 0.0);
    for (int j = 0; j < n; ++j) {
      cost[j] = p.obj[j] * col_scale[j];
      lb[j] = p.vars[j].lb / col_scale[j];
      ub[j] = p.vars[j].ub / col_scale[j];
    }
    for (int i = 0; i < m; ++i) {
      const auto& r = p.rows[i];
      double lo = -kInf, hi = kInf;
      if (r.sense != Sense::Le) lo = r.rhs;
      if (r.sense != Sense::Ge) hi = r.rhs;
      lb[n + i] = -hi * row_scale[i];
      ub[n + i] = -lo * row_scale[i];
    }
    offset = p.obj_offset;
    slack_basis();
  }

  void place_nonbasic(int j) {
    if (st[j] == Basis::kUpper && ub[j] < kInf) {
      x[j] = ub[j];
    } else if (lb[j] > -kInf) {
      st[j] = Basis::kLower;
      x[j] = lb[j];
    } else if (ub[j] < kInf) {
      st[j] = Basis::kUpper;
      x[j] = ub[j];
    } else {
      st[j] = Basis::kFree;
      x[j] = 0.0;
    }
  }

  void slack_basis() {
    st.assign(N, Basis::kLower);
    x.assign(N, 0.0);
    head.resize(m);
    pos.assign(N, -1);
    for (int j = 0; j < n; ++j) place_nonbasic(j);
    for (int i = 0; i < m; ++i) {
      st[n + i] = Basis::kBasic;
      head[i] = n + i;
      pos[n + i] = i;
    }
    factored = false;
    xb_valid = false;
  }

  bool load_basis(const Basis& b) {
    if (static_cast<int>(b.status.size()) != N) return false;
    int nb = 0;
    for (auto s : b.status) nb += s == Basis::kBasic;
    if (nb != m) return false;
    st = b.status;
    pos.assign(N, -1);
    int k = 0;
    for (int j = 0; j < N; ++j) {
      if (st[j] == Basis::kBasic) {
        head[k] = j;
        pos[j] = k++;
      } else {
        place_nonbasic(j);
      }
    }
    factored = false;
    xb_valid = false;
    return true;
  }

  // ---- linear algebra ----------------------------------------------------

  template <class F>
  void for_col(int j, F&& f) const {
    if (j >= n) {
      f(j - n, 1.0);
      return;
    }
    for (int k = cp[j]; k < cp[j + 1]; ++k) f(ri[k], cv[k]);
  }

  double dot_col(const Vec& y, int j) const {
    if (j >= n) return y[j - n];
    double s = 0.0;
    for (int k = cp[j]; k < cp[j + 1]; ++k) s += y[ri[k]] * cv[k];
    return s;
  }

  bool refactor() {
    etas.clear();
    factored = false;
    if (m == 0) {
      factored = true;
      return true;
    }
    std::vector<Eigen::Triplet<double>> tr;
    for (int k = 0; k < m; ++k) for_col(head[k], [&](int i, double v) { tr.emplace_back(i, k, v); });
    SpMat B(m, m);
    B.setFromTriplets(tr.begin(), tr.end());
    B.makeCompressed();
    lu.analyzePattern(B);
    lu.factorize(B);
    if (lu.info() != Eigen::Success) return false;
    factored = true;
    return true;
  }

  void ftran(Vec& v) const {
    if (m == 0) return;
    v = lu.solve(v);
    for (const auto& e : etas) {
      const double pr = v[e.r] / e.col[e.r];
      if (pr != 0.0) v -= pr * e.col;
      v[e.r] = pr;
    }
  }

  void btran(Vec& v) const {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      const double d = v.dot(it->col) - v[it->r] * it->col[it->r];
      v[it->r] = (v[it->r] - d) / it->col[it->r];
    }
    v = lu.transpose().solve(v);
  }

  void compute_xb() {
    Vec rhs = Vec::Zero(m);
    for (int j = 0; j < N; ++j) {
      if (st[j] == Basis::kBasic || x[j] == 0.0) continue;
      const double xj = x[j];
      for_col(j, [&](int i, double v) { rhs[i] -= v * xj; });
    }
    ftran(rhs);
    for (int k = 0; k < m; ++k) x[head[k]] = rhs[k];
    xb_valid = true;
  }

  // Refactors and recomputes the basic values; on a singular basis the
  // offending state is replaced by the slack basis.
  bool fresh_factor() {
    if (!refactor()) {
      slack_basis();
      if (!refactor()) return false;
    }
    compute_xb();
    return true;
  }

  void pivot(int r, int q, Vec&& alpha) {
    const int leaving = head[r];
    pos[leaving] = -1;
    head[r] = q;
    pos[q] = r;
    st[q] = Basis::kBasic;
    etas.push_back({r, std::move(alpha)});
  }

  bool maybe_refactor() {
    if (static_cast<int>(etas.size()) < opt.refactor_every) return true;
    return fresh_factor();
  }

  double infeas(int j) const {
    if (x[j] < lb[j] - opt.primal_tol) return lb[j] - x[j];
    if (x[j] > ub[j] + opt.primal_tol) return x[j] - ub[j];
    return 0.0;
  }

  Vec duals(const std::vector<double>& c) const {
    Vec y(m);
    for (int k = 0; k < m; ++k) y[k] = c[head[k]];
    btran(y);
    return y;
  }

  bool out_of_time() const {
    return (iters & 63) == 0 && std::chrono::steady_clock::now() > opt.deadline;
  }

  // ---- primal simplex ----------------------------------------------------

  LpStatus primal() {
    std::vector<double> c1(N, 0.0);
    std::vector<double> d(N, 0.0);
    while (true) {
      if (iters >= opt.max_iterations) return LpStatus::IterationLimit;
      if (out_of_time()) return LpStatus::TimeLimit;

      bool phase1 = false;
      for (int k = 0; k < m; ++k) {
        const int j = head[k];
        if (x[j] < lb[j] - opt.primal_tol) {
          c1[j] = -1.0;
          phase1 = true;
        } else if (x[j] > ub[j] + opt.primal_tol) {
          c1[j] = 1.0;
          phase1 = true;
        } else {
          c1[j] = 0.0;
        }
      }
      const auto& c = phase1 ? c1 : cost;
      const Vec y = duals(c);

      const bool bland = degenerate_run >= opt.degenerate_switch;
      int q = -1;
      double best = 0.0;
      for (int j = 0; j < N; ++j) {
        if (st[j] == Basis::kBasic) continue;
        if (lb[j] == ub[j]) continue;
        const double dj = (phase1 ? 0.0 : cost[j]) - dot_col(y, j);
        d[j] = dj;
        double score = 0.0;
        if (st[j] == Basis::kLower && dj < -opt.dual_tol) score = -dj;
        else if (st[j] == Basis::kUpper && dj > opt.dual_tol) score = dj;
        else if (st[j] == Basis::kFree && std::abs(dj) > opt.dual_tol) score = std::abs(dj);
        if (score <= 0.0) continue;
        if (bland) {
          q = j;
          break;
        }
        if (score > best) {
          best = score;
          q = j;
        }
      }
      if (q < 0) return phase1 ? LpStatus::Infeasible : LpStatus::Optimal;

      const double dir = d[q] < 0.0 ? 1.0 : -1.0;
      Vec alpha = Vec::Zero(m);
      for_col(q, [&](int i, double v) { alpha[i] = v; });
      ftran(alpha);

      // Harris two-pass ratio test; basic k moves at rate -dir * alpha_k and
      // blocks at the first bound it reaches (infeasible variables block at
      // the bound they violate).
      auto limit = [&](int k, double tol, double& ratio, bool& lower) {
        const double a = alpha[k];
        if (std::abs(a) <= opt.pivot_tol) return false;
        const int j = head[k];
        const double rate = -dir * a;
        if (rate < 0.0) {
          if (x[j] < lb[j] - opt.primal_tol) return false;
          lower = !(x[j] > ub[j] + opt.primal_tol);
          const double bound = lower ? lb[j] : ub[j];
          if (bound == -kInf) return false;
          ratio = (x[j] - bound + tol) / -rate;
        } else {
          if (x[j] > ub[j] + opt.primal_tol) return false;
          lower = x[j] < lb[j] - opt.primal_tol;
          const double bound = lower ? lb[j] : ub[j];
          if (bound == kInf) return false;
          ratio = (bound + tol - x[j]) / rate;
        }
        return true;
      };
      double theta_max = kInf;
      for (int k = 0; k < m; ++k) {
        double r;
        bool lo;
        if (limit(k, bland ? 0.0 : opt.primal_tol, r, lo)) theta_max = std::min(theta_max, r);
      }
      int leave = -1;
      bool leave_lower = true;
      double theta = kInf;
      if (theta_max < kInf) {
        double best_a = -1.0;
        for (int k = 0; k < m; ++k) {
          double r;
          bool lo;
          if (!limit(k, 0.0, r, lo) || r > theta_max) continue;
          const bool take = bland ? (leave < 0 || r < theta || (r == theta && head[k] < head[leave]))
                                  : std::abs(alpha[k]) > best_a;
          if (take) {
            best_a = std::abs(alpha[k]);
            leave = k;
            theta = r;
            leave_lower = lo;
          }
        }
        theta = std::max(theta, 0.0);
      }
      const double range = ub[q] - lb[q];
      const bool flip = range < kInf && range <= theta;
      if (leave < 0 && !flip) {
        if (phase1) return LpStatus::Numerical;
        return LpStatus::Unbounded;
      }
      ++iters;
      if (flip) theta = range;
      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;

      x[q] += dir * theta;
      if (theta != 0.0) {
        for (int k = 0; k < m; ++k) {
          if (alpha[k] != 0.0) x[head[k]] -= dir * theta * alpha[k];
        }
      }
      if (flip) {
        st[q] = dir > 0 ? Basis::kUpper : Basis::kLower;
        x[q] = dir > 0 ? ub[q] : lb[q];
        continue;
      }
      const int jl = head[leave];
      pivot(leave, q, std::move(alpha));
      st[jl] = leave_lower ? Basis::kLower : Basis::kUpper;
      x[jl] = leave_lower ? lb[jl] : ub[jl];
      if (!maybe_refactor()) return LpStatus::Numerical;
    }
  }

  // ---- dual simplex ------------------------------------------------------

  // Flips boxed nonbasics to the bound matching their reduced-cost sign.
  // Returns false when a dual infeasibility cannot be repaired that way.
  bool make_dual_feasible() {
    const Vec y = duals(cost);
    bool moved = false;
    for (int j = 0; j < N; ++j) {
      if (st[j] == Basis::kBasic || lb[j] == ub[j]) continue;
      const double dj = cost[j] - dot_col(y, j);
      if (st[j] == Basis::kLower && dj < -opt.dual_tol) {
        if (ub[j] == kInf) return false;
        st[j] = Basis::kUpper;
        x[j] = ub[j];
        moved = true;
      } else if (st[j] == Basis::kUpper && dj > opt.dual_tol) {
        if (lb[j] == -kInf) return false;
        st[j] = Basis::kLower;
        x[j] = lb[j];
        moved = true;
      } else if (st[j] == Basis::kFree && std::abs(dj) > opt.dual_tol) {
        return false;
      }
    }
    if (moved) compute_xb();
    return true;
  }

  LpStatus dual() {
    std::vector<double> d(N, 0.0);
    while (true) {
      if (iters >= opt.max_iterations) return LpStatus::IterationLimit;
      if (out_of_time()) return LpStatus::TimeLimit;

      int r = -1;
      double worst = 0.0;
      for (int k = 0; k < m; ++k) {
        const double v = infeas(head[k]);
        if (v > worst) {
          worst = v;
          r = k;
        }
      }
      if (r < 0) return LpStatus::Optimal;
      const int jr = head[r];
      const bool up = x[jr] < lb[jr];  // x_r must increase to its lower bound
      const double target = up ? lb[jr] : ub[jr];

      const Vec y = duals(cost);
      Vec rho = Vec::Zero(m);
      rho[r] = 1.0;
      btran(rho);

      // Candidates: moving j by t changes x_r by -alpha_rj t.
      std::vector<std::pair<int, double>> cand;
      double theta_max = kInf;
      for (int j = 0; j < N; ++j) {
        if (st[j] == Basis::kBasic || lb[j] == ub[j]) continue;
        const double a = dot_col(rho, j);
        if (std::abs(a) <= opt.pivot_tol) continue;
        const double s = up ? -a : a;  // > 0 means raising x_j helps
        bool ok;
        if (st[j] == Basis::kLower) ok = s > 0.0;
        else if (st[j] == Basis::kUpper) ok = s < 0.0;
        else ok = true;
        if (!ok) continue;
        const double dj = cost[j] - dot_col(y, j);
        d[j] = dj;
        cand.emplace_back(j, a);
        const double ratio = (std::abs(dj) + opt.dual_tol) / std::abs(a);
        theta_max = std::min(theta_max, ratio);
      }
      if (cand.empty()) return LpStatus::Infeasible;
      int q = -1;
      double best_a = -1.0;
      for (const auto& [j, a] : cand) {
        const double ratio = std::abs(d[j]) / std::abs(a);
        if (ratio <= theta_max && std::abs(a) > best_a) {
          best_a = std::abs(a);
          q = j;
        }
      }
      if (q < 0) return LpStatus::Numerical;

      Vec alpha = Vec::Zero(m);
      for_col(q, [&](int i, double v) { alpha[i] = v; });
      ftran(alpha);
      if (std::abs(alpha[r]) <= opt.pivot_tol) {
        if (!fresh_factor()) return LpStatus::Numerical;
        continue;
      }
      ++iters;
      const double t = (x[jr] - target) / alpha[r];
      x[q] += t;
      for (int k = 0; k < m; ++k) {
        if (alpha[k] != 0.0) x[head[k]] -= t * alpha[k];
      }
      pivot(r, q, std::move(alpha));
      x[jr] = target;
      st[jr] = up ? Basis::kLower : Basis::kUpper;
      if (!maybe_refactor()) return LpStatus::Numerical;
    }
  }

  LpStatus run() {
    degenerate_run = 0;
    if (!factored || !xb_valid) {
      if (!fresh_factor()) return LpStatus::Numerical;
    }
    bool primal_feasible = true;
    for (int k = 0; k < m && primal_feasible; ++k) primal_feasible = infeas(head[k]) == 0.0;
    if (!primal_feasible && make_dual_feasible()) {
      const auto s = dual();
      if (s == LpStatus::Infeasible || s == LpStatus::TimeLimit || s == LpStatus::IterationLimit) return s;
      if (s == LpStatus::Numerical && !fresh_factor()) return s;
    }
    auto s = primal();
    if (s == LpStatus::Numerical) {
      // One retry from a clean factorization.
      if (!fresh_factor()) return s;
      s = primal();
    }
    if (s == LpStatus::Optimal) {
      // Confirm on a fresh factorization so drift does not fake optimality.
      if (!fresh_factor()) return LpStatus::Numerical;
      s = primal();
    }
    return s;
  }
};

LpSolver::LpSolver(const CanonicalProgram& p, SimplexOptions opts) : impl_(std::make_unique<Impl>()) {
  p.validate();
  impl_->opt = opts;
  impl_->load(p);
}

LpSolver::~LpSolver() = default;

int LpSolver::num_cols() const { return impl_->n; }
int LpSolver::num_rows() const { return impl_->m; }

void LpSolver::set_bounds(int j, double lb, double ub) {
  auto& I = *impl_;
  if (j < 0 || j >= I.n) throw ValidationError("set_bounds: column out of range");
  if (lb > ub) throw ValidationError("set_bounds: lb > ub");
  I.lb[j] = lb / I.col_scale[j];
  I.ub[j] = ub / I.col_scale[j];
  if (I.st[j] != Basis::kBasic) {
    const double old = I.x[j];
    I.place_nonbasic(j);
    if (I.x[j] != old) I.xb_valid = false;
  }
}

double LpSolver::lower(int j) const { return impl_->lb[j] * impl_->col_scale[j]; }
double LpSolver::upper(int j) const { return impl_->ub[j] * impl_->col_scale[j]; }

void LpSolver::set_deadline(std::chrono::steady_clock::time_point t) { impl_->opt.deadline = t; }

LpStatus LpSolver::solve() { return impl_->run(); }

Basis LpSolver::basis() const { return {impl_->st}; }

void LpSolver::set_basis(const Basis& b) {
  if (!impl_->load_basis(b)) impl_->slack_basis();
}

std::vector<double> LpSolver::primal() const {
  const auto& I = *impl_;
  std::vector<double> out(I.n);
  for (int j = 0; j < I.n; ++j) {
    double v = I.x[j] * I.col_scale[j];
    const double lo = I.lb[j] * I.col_scale[j], hi = I.ub[j] * I.col_scale[j];
    out[j] = std::clamp(v, lo, hi);
  }
  return out;
}

double LpSolver::objective() const {
  const auto& I = *impl_;
  double s = I.offset;
  for (int j = 0; j < I.n; ++j) s += I.cost[j] * I.x[j];
  return s;
}

long LpSolver::iterations() const { return impl_->iters; }

LpResult solve_lp(const CanonicalProgram& p, const SimplexOptions& opts) {
  LpSolver s(p, opts);
  LpResult r;
  r.status = s.solve();
  r.iterations = s.iterations();
  if (r.status == LpStatus::Optimal) {
    r.x = s.primal();
    r.objective = p.objective_value(r.x);
  }
  return r;
}

}  // namespace jced
