#include "jcedkit/branch_and_bound.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <tuple>

namespace jced {

const char* to_string(MipStatus s) {
  switch (s) {
    case MipStatus::Optimal: return "optimal";
    case MipStatus::Infeasible: return "infeasible";
    case MipStatus::Unbounded: return "unbounded";
    case MipStatus::Limit: return "limit";
    case MipStatus::Numerical: return "numerical";
  }
  return "?";
}

namespace {

struct Fix {
  int col;
  double lb, ub;
};

struct Node {
  double bound = -kInf;
  long id = 0;
  int depth = 0;
  std::vector<Fix> fixes;  // along the path from the root, later entries win
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

class Search {
 public:
  Search(const CanonicalProgram& p, const MipOptions& o)
      : p_(p), opt_(o), lp_(p, o.lp), start_(std::chrono::steady_clock::now()) {
    deadline_ = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(o.time_limit_s));
    lp_.set_deadline(deadline_);
    for (int j = 0; j < p.num_vars(); ++j) {
      if (p.vars[j].is_integer) ints_.push_back(j);
    }
  }

  MipResult run() {
    MipResult res;
    auto root_basis = std::make_shared<Basis>();
    const auto s = lp_.solve();
    res.lp_iterations = lp_.iterations();
    if (s == LpStatus::Infeasible) {
      res.status = MipStatus::Infeasible;
      return res;
    }
    if (s == LpStatus::Unbounded) {
      res.status = MipStatus::Unbounded;
      return res;
    }
    if (s != LpStatus::Optimal) {
      res.status = s == LpStatus::TimeLimit ? MipStatus::Limit : MipStatus::Numerical;
      return res;
    }
    *root_basis = lp_.basis();
    const double root_obj = lp_.objective();
    auto xr = lp_.primal();
    if (opt_.heuristic_every > 0 && branch_var(xr) >= 0) dive({}, root_basis);

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push({root_obj, next_id_++, 0, {}, root_basis});
    bool limit = false;
    while (!open.empty()) {
      if (std::chrono::steady_clock::now() > deadline_ || nodes_ >= opt_.node_limit) {
        limit = true;
        break;
      }
      Node node = open.top();
      open.pop();
      if (prunable(node.bound)) continue;
      ++nodes_;
      apply(node.fixes);
      lp_.set_basis(*node.basis);
      const auto st = lp_.solve();
      if (st == LpStatus::TimeLimit || st == LpStatus::IterationLimit) {
        open.push(node);
        limit = true;
        break;
      }
      if (st != LpStatus::Optimal) continue;  // infeasible (or numerically lost) subtree
      const double obj = lp_.objective();
      if (prunable(obj)) continue;
      auto x = lp_.primal();
      const int j = branch_var(x);
      if (j < 0) {
        consider(x, obj);
        continue;
      }
      auto basis = std::make_shared<const Basis>(lp_.basis());
      if (opt_.heuristic_every > 0 && nodes_ % opt_.heuristic_every == 0) round(x, node.fixes, basis);
      const double v = x[j];
      Node down{obj, next_id_++, node.depth + 1, node.fixes, basis};
      down.fixes.push_back({j, lower(node.fixes, j), std::floor(v)});
      Node up{obj, next_id_++, node.depth + 1, node.fixes, basis};
      up.fixes.push_back({j, std::ceil(v), upper(node.fixes, j)});
      open.push(std::move(down));
      open.push(std::move(up));
    }

    res.nodes = nodes_;
    res.lp_iterations = lp_.iterations();
    double bound = best_obj_;
    if (!open.empty()) bound = std::min(bound, open.top().bound);
    res.bound = open.empty() && !limit ? best_obj_ : bound;
    if (!best_x_.empty()) {
      res.x = best_x_;
      res.objective = best_obj_;
      res.status = limit && !prunable(bound) ? MipStatus::Limit : MipStatus::Optimal;
    } else {
      res.status = limit ? MipStatus::Limit : MipStatus::Infeasible;
    }
    return res;
  }

 private:
  bool prunable(double bound) const {
    if (best_x_.empty()) return false;
    const double tol = std::max(opt_.abs_gap, opt_.rel_gap * std::abs(best_obj_));
    return bound >= best_obj_ - tol;
  }

  double lower(const std::vector<Fix>& f, int j) const {
    double v = p_.vars[j].lb;
    for (const auto& x : f) {
      if (x.col == j) v = x.lb;
    }
    return v;
  }
  double upper(const std::vector<Fix>& f, int j) const {
    double v = p_.vars[j].ub;
    for (const auto& x : f) {
      if (x.col == j) v = x.ub;
    }
    return v;
  }

  void apply(const std::vector<Fix>& fixes) {
    for (int j : touched_) lp_.set_bounds(j, p_.vars[j].lb, p_.vars[j].ub);
    touched_.clear();
    for (const auto& f : fixes) {
      lp_.set_bounds(f.col, f.lb, f.ub);
      touched_.push_back(f.col);
    }
  }

  // Most fractional integer column, or -1 when x is integral.
  int branch_var(const std::vector<double>& x) const {
    int best = -1;
    double score = opt_.int_tol;
    for (int j : ints_) {
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > score) {
        score = f;
        best = j;
      }
    }
    return best;
  }

  void consider(std::vector<double> x, double obj) {
    for (int j : ints_) x[j] = std::round(x[j]);
    if (p_.max_violation(x, true) > 1e-6) return;
    obj = p_.objective_value(x);
    if (best_x_.empty() || obj < best_obj_) {
      best_obj_ = obj;
      best_x_ = std::move(x);
    }
  }

  bool try_fixed(const std::vector<Fix>& fixes, const std::shared_ptr<const Basis>& basis) {
    apply(fixes);
    lp_.set_basis(*basis);
    if (lp_.solve() != LpStatus::Optimal) return false;
    auto x = lp_.primal();
    if (branch_var(x) >= 0) return false;
    const auto before = best_obj_;
    consider(std::move(x), lp_.objective());
    return best_obj_ < before || (before == kInf && !best_x_.empty());
  }

  // Fix-and-resolve with the integers rounded to nearest, then down.
  void round(const std::vector<double>& x, const std::vector<Fix>& base, const std::shared_ptr<const Basis>& basis) {
    for (int mode = 0; mode < 2; ++mode) {
      auto fixes = base;
      for (int j : ints_) {
        const double v = mode == 0 ? std::round(x[j]) : std::floor(x[j] + opt_.int_tol);
        fixes.push_back({j, v, v});
      }
      if (try_fixed(fixes, basis)) return;
    }
  }

  // Repeatedly fixes the fractional column closest to integrality and
  // re-solves; a failed step tries the opposite rounding once.
  void dive(std::vector<Fix> fixes, std::shared_ptr<const Basis> basis) {
    for (std::size_t step = 0; step <= ints_.size(); ++step) {
      if (std::chrono::steady_clock::now() > deadline_) return;
      apply(fixes);
      lp_.set_basis(*basis);
      if (lp_.solve() != LpStatus::Optimal) return;
      const double obj = lp_.objective();
      if (prunable(obj)) return;
      auto x = lp_.primal();
      int j = -1;
      double dist = 1.0;
      for (int c : ints_) {
        const double f = std::abs(x[c] - std::round(x[c]));
        if (f > opt_.int_tol && f < dist) {
          dist = f;
          j = c;
        }
      }
      if (j < 0) {
        consider(std::move(x), obj);
        return;
      }
      basis = std::make_shared<const Basis>(lp_.basis());
      const double r = std::round(x[j]);
      fixes.push_back({j, r, r});
      apply(fixes);
      lp_.set_basis(*basis);
      if (lp_.solve() != LpStatus::Optimal) {
        const double other = r > x[j] ? std::floor(x[j]) : std::ceil(x[j]);
        fixes.back() = {j, other, other};
      }
    }
  }

  const CanonicalProgram& p_;
  MipOptions opt_;
  LpSolver lp_;
  std::chrono::steady_clock::time_point start_, deadline_;
  std::vector<int> ints_;
  std::vector<int> touched_;
  std::vector<double> best_x_;
  double best_obj_ = kInf;
  long nodes_ = 0;
  long next_id_ = 0;
};

}  // namespace

MipResult branch_and_bound(const CanonicalProgram& p, const MipOptions& opts) {
  Search s(p, opts);
  return s.run();
}

}  // namespace jced
