#include "jcedkit/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "jcedkit/error.hpp"
#include "jcedkit/numfmt.hpp"
#include "jcedkit/sfr.hpp"

namespace jced {

namespace {

struct ScenarioCheck {
  bool dibr = false, sfr = false, line = false;
  double unmet = 0.0;
};

constexpr double kTol = 1e-6;

}  // namespace

ExPostReport ex_post_evaluate(const DispatchDecision& d, const GridCase& c, const PtdfMatrix& ptdf,
                              const ScenarioSet& test, double shed_price, int fuel_segments, unsigned jobs) {
  d.check_dimensions(c);
  test.validate(c);
  if (ptdf.lines() != c.lines.size() || ptdf.buses() != c.buses.size()) throw ValidationError("ex_post_evaluate: PTDF does not match case");
  const auto& t = c.thresholds;
  const std::size_t nb = c.buses.size(), nl = c.lines.size();

  std::vector<double> headroom(c.dibr.size());
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    headroom[w] = pfr_headroom_bound(d.H_w[w], d.D_w[w], t, c.f0_hz, c.dibr[w].capacity_mw);
  }
  // Scenario-independent part of each line flow for the up/down deployments.
  std::vector<double> base_up(nl, 0.0), base_dn(nl, 0.0);
  for (std::size_t l = 0; l < nl; ++l) {
    double s = 0.0, up = 0.0, dn = 0.0;
    for (std::size_t g = 0; g < c.thermal.size(); ++g) {
      const double f = ptdf(l, c.bus_index(c.thermal[g].bus));
      s += f * d.p_g[g];
      if (c.thermal[g].is_agc) {
        up += f * d.r_up[g];
        dn -= f * d.r_dn[g];
      }
    }
    for (std::size_t w = 0; w < c.dibr.size(); ++w) s += ptdf(l, c.bus_index(c.dibr[w].bus)) * d.p_w[w];
    for (std::size_t e = 0; e < c.storage.size(); ++e) s += ptdf(l, c.bus_index(c.storage[e].bus)) * d.p_e[e];
    base_up[l] = s + up;
    base_dn[l] = s + dn;
  }

  const std::size_t n = test.size();
  std::vector<ScenarioCheck> out(n);
  auto work = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) {
      const auto& s = test.scenarios[i];
      auto& r = out[i];
      for (std::size_t w = 0; w < c.dibr.size(); ++w) {
        const double short_mw = d.p_w[w] + headroom[w] - s.pbar[w];
        if (short_mw > kTol) {
          r.dibr = true;
          r.unmet += short_mw;
        }
      }
      for (std::size_t g = 0; g < c.thermal.size(); ++g) {
        if (!c.thermal[g].is_agc) continue;
        const double x = d.alpha[g] * s.dp_load;
        const double over = std::max(x - d.r_up[g], -x - d.r_dn[g]);
        if (over > kTol) {
          r.sfr = true;
          r.unmet += over;
        }
      }
      for (std::size_t l = 0; l < nl; ++l) {
        double e = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
          e += ptdf(l, b) * (c.buses[b].load_mw + s.zeta_d[b] - c.buses[b].ibr_mw - s.zeta_h[b]);
        }
        const double F = c.lines[l].capacity_mw;
        const double over = std::max(std::abs(base_up[l] - e), std::abs(base_dn[l] - e)) - F;
        if (over > kTol) {
          r.line = true;
          r.unmet += over;
        }
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n / 256 + 1)));
  if (nt == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < nt; ++k) pool.emplace_back(work, n * k / nt, n * (k + 1) / nt);
    for (auto& th : pool) th.join();
  }

  ExPostReport rep;
  rep.n_test = n;
  rep.seed = test.seed;
  rep.shed_price = shed_price;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = test.scenarios[i].prob;
    const auto& r = out[i];
    if (r.dibr) rep.p_dibr_up += p, ++rep.n_dibr_up;
    if (r.sfr) rep.p_sfr += p, ++rep.n_sfr;
    if (r.line) rep.p_line += p, ++rep.n_line;
    rep.expected_unmet_mw += p * r.unmet;
  }
  rep.expost_cost = shed_price * rep.expected_unmet_mw * t.dt_h;
  rep.objective_cost = evaluate_objective(d, test, c, fuel_segments).exact();
  return rep;
}

std::vector<FamilyViolations> training_violations(const SymbolicModel& m, const ScenarioSet& set,
                                                  const std::vector<double>& x, double tol) {
  const auto probs = set.probabilities();
  std::vector<FamilyViolations> out;
  for (const auto& b : m.blocks) {
    std::vector<char> hit(set.size(), 0);
    for (const auto& row : b.rows) {
      double lhs = 0.0;
      for (const auto& [j, a] : row.lhs) lhs += a * x.at(j);
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (lhs < row.rhs[i] - tol * std::max(1.0, std::abs(row.rhs[i]))) hit[i] = 1;
      }
    }
    FamilyViolations f;
    f.family = b.family;
    f.delta = b.delta;
    f.allowed = droppable_count(probs, b.delta);
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (hit[i]) {
        ++f.count;
        f.probability += probs[i];
      }
    }
    out.push_back(f);
  }
  return out;
}

Comparison compare_methods(const SymbolicModel& m, const GridCase& c, const ScenarioSet& set,
                           const std::vector<Method>& methods, int repeats, const ReformOptions& ropts,
                           const SolveOptions& sopts) {
  if (repeats < 1) throw ValidationError("compare_methods: repeats must be >= 1");
  Comparison cmp;
  for (Method meth : methods) {
    std::vector<double> times;
    MethodRun best;
    for (int r = 0; r < repeats; ++r) {
      auto run = run_method(m, c, set, meth, ropts, sopts);
      times.push_back(run.wall_time_s());
      if (r == 0 || run.wall_time_s() < best.wall_time_s()) best = std::move(run);
    }
    cmp.runs.push_back(std::move(best));
    cmp.times.push_back(std::move(times));
  }
  const MethodRun* saa = nullptr;
  const MethodRun* msaa = nullptr;
  for (const auto& r : cmp.runs) {
    if (r.method == Method::Saa) saa = &r;
    if (r.method == Method::Msaa) msaa = &r;
  }
  if (saa && msaa && saa->has_decision && msaa->has_decision) {
    cmp.has_pair = true;
    const double a = saa->solution.objective, b = msaa->solution.objective;
    cmp.cost_error = (a - b) / a;
    cmp.speedup = msaa->wall_time_s() > 0.0 ? saa->wall_time_s() / msaa->wall_time_s() : 0.0;
  }
  return cmp;
}

std::string report_json(const ExPostReport& r) {
  nlohmann::ordered_json j;
  j["n_test"] = r.n_test;
  j["seed"] = r.seed;
  j["shed_price"] = r.shed_price;
  j["deficiency"] = {{"dibr_up", r.p_dibr_up}, {"sfr", r.p_sfr}, {"line_flow", r.p_line}};
  j["violations"] = {{"dibr_up", r.n_dibr_up}, {"sfr", r.n_sfr}, {"line_flow", r.n_line}};
  j["expected_unmet_mw"] = r.expected_unmet_mw;
  j["objective_cost"] = r.objective_cost;
  j["expost_cost"] = r.expost_cost;
  j["total_cost"] = r.total_cost();
  return j.dump(2);
}

std::string report_text(const ExPostReport& r) {
  char buf[256];
  std::ostringstream o;
  std::snprintf(buf, sizeof buf, "test scenarios  %zu (seed %llu)\n", r.n_test,
                static_cast<unsigned long long>(r.seed));
  o << buf;
  o << "family      deficiency   count\n";
  std::snprintf(buf, sizeof buf, "dibr_up     %9.4f%%  %6zu\n", 100.0 * r.p_dibr_up, r.n_dibr_up);
  o << buf;
  std::snprintf(buf, sizeof buf, "sfr         %9.4f%%  %6zu\n", 100.0 * r.p_sfr, r.n_sfr);
  o << buf;
  std::snprintf(buf, sizeof buf, "line_flow   %9.4f%%  %6zu\n", 100.0 * r.p_line, r.n_line);
  o << buf;
  std::snprintf(buf, sizeof buf, "objective cost  %14.2f $\nex-post cost    %14.2f $\ntotal cost      %14.2f $\n",
                r.objective_cost, r.expost_cost, r.total_cost());
  o << buf;
  return o.str();
}

std::string comparison_json(const Comparison& cmp) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < cmp.runs.size(); ++k) {
    const auto& r = cmp.runs[k];
    runs.push_back({{"method", to_string(r.method)},
                    {"status", to_string(r.solution.status)},
                    {"objective", r.solution.objective},
                    {"objective_exact", r.has_decision ? r.cost.exact() : 0.0},
                    {"wall_time_s", r.wall_time_s()},
                    {"times_s", cmp.times[k]},
                    {"solver", r.solution.solver},
                    {"variables", r.vars},
                    {"rows", r.rows},
                    {"integers", r.integers},
                    {"nonzeros", r.nnz},
                    {"indicators", r.stats.indicators()},
                    {"mixing_cuts", r.stats.mixing_cuts()},
                    {"aggregated_cuts", r.stats.aggregated_cuts()},
                    {"nodes", r.solution.nodes}});
  }
  j["runs"] = runs;
  if (cmp.has_pair) {
    j["cost_error"] = cmp.cost_error;
    j["speedup"] = cmp.speedup;
  }
  return j.dump(2);
}

std::string comparison_text(const Comparison& cmp) {
  char buf[256];
  std::ostringstream o;
  o << "method  status       objective ($)   time (s)    vars    rows   ints  cuts\n";
  for (const auto& r : cmp.runs) {
    std::snprintf(buf, sizeof buf, "%-7s %-10s %15.4f %10.3f %7d %7d %6d %5zu\n", to_string(r.method),
                  to_string(r.solution.status), r.solution.objective, r.wall_time_s(), r.vars, r.rows, r.integers,
                  r.stats.mixing_cuts() + r.stats.aggregated_cuts());
    o << buf;
  }
  if (cmp.has_pair) {
    std::snprintf(buf, sizeof buf, "cost error (saa - msaa)/saa  %.4f%%\nspeedup saa/msaa            %.2fx\n",
                  100.0 * cmp.cost_error, cmp.speedup);
    o << buf;
  }
  return o.str();
}

std::string comparison_csv_rows(const Comparison& cmp, std::size_t n, bool header) {
  std::ostringstream o;
  if (header) o << "n,method,status,objective,wall_time_s\n";
  for (const auto& r : cmp.runs) {
    o << n << "," << to_string(r.method) << "," << to_string(r.solution.status) << ","
      << format_double(r.solution.objective) << "," << format_double(r.wall_time_s()) << "\n";
  }
  return o.str();
}

}  // namespace jced
