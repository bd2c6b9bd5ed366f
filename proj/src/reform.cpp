#include "jcedkit/reform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jcedkit/error.hpp"

namespace jced {

namespace {

constexpr double kProbTol = 1e-12;

// Indices sorted by value, largest first; ties keep scenario order.
std::vector<int> sorted_desc(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
  return idx;
}

std::vector<int> top(const std::vector<double>& v, std::size_t count) {
  auto idx = sorted_desc(v);
  if (idx.size() > count) idx.resize(count);
  return idx;
}

MixingCut telescoping(const std::vector<double>& w, const std::vector<int>& order) {
  MixingCut cut;
  if (order.empty()) return cut;
  for (std::size_t s = 0; s < order.size(); ++s) {
    const double next = s + 1 < order.size() ? w[order[s + 1]] : 0.0;
    const double drop = w[order[s]] - next;
    if (drop < 0.0) throw ValidationError("mixing cut: subsequence is not sorted nonincreasing");
    if (drop > 0.0) cut.z.emplace_back(order[s], drop);
  }
  cut.rhs = w[order.front()];
  return cut;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Saa: return "saa";
    case Method::Msaa: return "msaa";
    case Method::Robust: return "robust";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "saa") return Method::Saa;
  if (s == "msaa") return Method::Msaa;
  if (s == "robust") return Method::Robust;
  throw ValidationError("unknown method '" + s + "' (expected saa, msaa or robust)");
}

std::size_t droppable_count(const std::vector<double>& probs, double delta) {
  auto p = probs;
  std::sort(p.begin(), p.end());
  double acc = 0.0;
  std::size_t k = 0;
  for (double q : p) {
    if (acc + q > delta + kProbTol) break;
    acc += q;
    ++k;
  }
  return k;
}

MixingSet make_mixing_set(const std::vector<double>& rhs, const std::vector<double>& probs, double delta,
                          bool strengthen) {
  if (rhs.size() != probs.size()) throw ValidationError("mixing set: rhs and probabilities differ in length");
  if (rhs.empty()) throw ValidationError("mixing set: no scenarios");
  MixingSet ms;
  ms.delta = delta;
  ms.k = droppable_count(probs, delta);
  const auto order = sorted_desc(rhs);
  if (strengthen && ms.k < rhs.size()) {
    ms.base = rhs[order[ms.k]];
  } else {
    ms.base = rhs[order.back()];
  }
  ms.w.resize(rhs.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    const double w = strengthen ? std::max(0.0, rhs[i] - ms.base) : rhs[i] - ms.base;
    if (!(w >= 0.0)) throw NumericalError("mixing set: negative offset w_" + std::to_string(i));
    ms.w[i] = w;
  }
  if (strengthen) {
    ms.order = top(ms.w, ms.k + 1);
  } else {
    ms.order = order;
  }
  return ms;
}

MixingCut build_mixing_cut(const MixingSet& ms) { return telescoping(ms.w, ms.order); }

TwoSidedMixingSet make_two_sided_set(const std::vector<double>& e, double capacity, std::size_t k) {
  if (e.empty()) throw ValidationError("two-sided mixing set: no scenarios");
  TwoSidedMixingSet ts;
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  ts.capacity = capacity;
  ts.center = 0.5 * (*lo + *hi);
  ts.y_c = 2.0 * capacity;
  ts.v_low.resize(e.size());
  ts.v_up.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    ts.v_low[i] = capacity + e[i] - ts.center;
    ts.v_up[i] = capacity - e[i] + ts.center;
  }
  ts.u_a = *std::max_element(ts.v_low.begin(), ts.v_low.end());
  ts.tau_r = top(ts.v_low, k + 1);
  ts.tau_g = top(ts.v_up, k + 1);
  return ts;
}

bool aggregated_precondition(const TwoSidedMixingSet& ts) {
  for (std::size_t i = 0; i < ts.v_low.size(); ++i) {
    if (ts.v_low[i] < 0.0 || ts.v_up[i] < 0.0) return false;
  }
  return true;
}

MixingCut build_aggregated_cut(const TwoSidedMixingSet& ts) {
  if (!aggregated_precondition(ts)) {
    throw ValidationError("aggregated cut: offsets v_low/v_up must be nonnegative (line range exceeds 2F)");
  }
  auto a = telescoping(ts.v_low, ts.tau_r);
  auto b = telescoping(ts.v_up, ts.tau_g);
  MixingCut cut;
  cut.z = std::move(a.z);
  cut.z.insert(cut.z.end(), b.z.begin(), b.z.end());
  cut.rhs = a.rhs + b.rhs - 2.0 * ts.y_c;
  return cut;
}

std::size_t ReformStats::indicators() const {
  std::size_t s = 0;
  for (const auto& b : blocks) s += b.indicators;
  return s;
}

std::size_t ReformStats::mixing_cuts() const {
  std::size_t s = 0;
  for (const auto& b : blocks) s += b.mixing_cuts;
  return s;
}

std::size_t ReformStats::aggregated_cuts() const {
  std::size_t s = 0;
  for (const auto& b : blocks) s += b.aggregated_cuts;
  return s;
}

CanonicalProgram reformulate(const SymbolicModel& m, const ScenarioSet& set, Method method,
                             const ReformOptions& opts, ReformStats* stats) {
  CanonicalProgram p = m.det;
  p.name = std::string("jced_") + to_string(method);
  const auto probs = set.probabilities();
  const std::size_t n = probs.size();
  ReformStats local;

  for (const auto& blk : m.blocks) {
    BlockStats bs;
    bs.family = blk.family;
    bs.rows = blk.rows.size();
    for (const auto& row : blk.rows) {
      if (row.rhs.size() != n) throw ValidationError("reformulate: row " + row.name + " has wrong scenario count");
    }
    const std::size_t k = method == Method::Robust ? 0 : droppable_count(probs, blk.delta);
    bs.k = k;

    if (k >= n) {
      bs.vacuous = true;
      local.blocks.push_back(bs);
      continue;
    }
    if (k == 0) {
      bs.robust = true;
      for (const auto& row : blk.rows) {
        p.add_row(row.name, Sense::Ge, *std::max_element(row.rhs.begin(), row.rhs.end()), row.lhs, blk.family);
      }
      local.blocks.push_back(bs);
      continue;
    }

    const bool relax = method == Method::Msaa;
    std::vector<int> z(n, -1);
    auto zvar = [&](int i) {
      if (z[i] < 0) {
        z[i] = p.add_var("z_" + blk.family + "_" + std::to_string(set.scenarios[i].index), 0.0, 1.0, 0.0, !relax);
        ++bs.indicators;
      }
      return z[i];
    };

    std::vector<MixingSet> sets;
    sets.reserve(blk.rows.size());
    for (const auto& row : blk.rows) {
      auto ms = make_mixing_set(row.rhs, probs, blk.delta, opts.strengthen);
      const int y = p.add_var("y_" + row.name, 0.0, kInf);
      Terms eq = row.lhs;
      eq.emplace_back(y, -1.0);
      p.add_row(row.name, Sense::Eq, ms.base, eq, blk.family);
      for (std::size_t i = 0; i < n; ++i) {
        if (opts.strengthen && ms.w[i] == 0.0) continue;
        p.add_row("mix_" + row.name + "_" + std::to_string(set.scenarios[i].index), Sense::Ge, ms.w[i],
                  {{y, 1.0}, {zvar(static_cast<int>(i)), ms.w[i]}}, blk.family);
        ++bs.mixing_rows;
      }
      if (relax && opts.mixing_cuts && !ms.order.empty() && ms.w[ms.order.front()] > 0.0) {
        const auto cut = build_mixing_cut(ms);
        Terms t{{y, 1.0}};
        for (const auto& [i, c] : cut.z) t.emplace_back(zvar(i), c);
        p.add_row("cut_" + row.name, Sense::Ge, cut.rhs, t, blk.family);
        ++bs.mixing_cuts;
      }
      sets.push_back(std::move(ms));
    }

    if (relax && opts.aggregated_cuts) {
      for (const auto& pr : blk.pairs) {
        const auto& low = blk.rows[pr.low].rhs;
        // e_i = rhs_low_i + F on the low row.
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i) e[i] = low[i] + pr.capacity;
        const auto ts = make_two_sided_set(e, pr.capacity, k);
        if (!aggregated_precondition(ts)) {
          ++bs.aggregated_skipped;
          continue;
        }
        const auto cut = build_aggregated_cut(ts);
        if (cut.z.empty()) continue;
        Terms t;
        for (const auto& [i, c] : cut.z) t.emplace_back(zvar(i), c);
        p.add_row("agg_" + blk.rows[pr.low].name, Sense::Ge, cut.rhs, t, blk.family);
        ++bs.aggregated_cuts;
      }
    }

    Terms budget;
    for (std::size_t i = 0; i < n; ++i) {
      if (z[i] >= 0) budget.emplace_back(z[i], probs[i]);
    }
    if (!budget.empty()) p.add_row("budget_" + blk.family, Sense::Le, blk.delta, budget, blk.family);
    local.blocks.push_back(bs);
  }

  p.assemble();
  if (stats) *stats = std::move(local);
  return p;
}

}  // namespace jced
