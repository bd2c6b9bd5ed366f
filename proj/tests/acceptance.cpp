// Acceptance run: one pass/fail line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "jcedkit/builder.hpp"
#include "jcedkit/dynamics.hpp"
#include "jcedkit/error.hpp"
#include "jcedkit/evaluator.hpp"
#include "jcedkit/nadir_boundary.hpp"
#include "jcedkit/pipeline.hpp"
#include "jcedkit/reform.hpp"
#include "jcedkit/sfr.hpp"

using namespace jced;

namespace {

const std::filesystem::path kCases = std::filesystem::path(JCEDKIT_DATA_DIR) / "cases";

GridCase load(const char* name) { return load_case(kCases / (std::string(name) + ".json")); }
UncertaintyModel uncertainty(const char* name, const GridCase& c) {
  return load_uncertainty(kCases / (std::string(name) + ".uncertainty.json"), c);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Instance {
  std::string label;
  GridCase c;
  ScenarioSet set;
  SymbolicModel m;
  MethodRun saa, msaa, robust;
};

Instance run_instance(std::string label, GridCase c, ScenarioSet set, const BuildMode& mode, const SolveOptions& so) {
  Instance in{std::move(label), std::move(c), std::move(set), {}, {}, {}, {}};
  in.m = build_model(in.c, in.set, mode);
  in.saa = run_method(in.m, in.c, in.set, Method::Saa, {}, so);
  in.msaa = run_method(in.m, in.c, in.set, Method::Msaa, {}, so);
  in.robust = run_method(in.m, in.c, in.set, Method::Robust, {}, so);
  std::printf("  %-34s saa %-8s %11.4f (%7.2f s)  msaa %11.4f (%5.2f s)  robust %11.4f\n", in.label.c_str(),
              to_string(in.saa.solution.status), in.saa.solution.objective, in.saa.wall_time_s(),
              in.msaa.solution.objective, in.msaa.wall_time_s(), in.robust.solution.objective);
  std::fflush(stdout);
  return in;
}

// Every budget-feasible binary point with the least y the kept rows allow.
bool mixing_cut_valid(const std::vector<double>& rhs, const std::vector<double>& probs, double delta,
                      bool strengthen) {
  const auto ms = make_mixing_set(rhs, probs, delta, strengthen);
  const auto cut = build_mixing_cut(ms);
  const std::size_t n = rhs.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double used = 0.0;
    for (std::size_t i = 0; i < n; ++i) used += (mask >> i & 1u) ? probs[i] : 0.0;
    if (used > delta + 1e-12) continue;
    double y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1u)) y = std::max(y, rhs[i] - ms.base);
    }
    double lhs = y;
    for (const auto& [i, a] : cut.z) lhs += (mask >> i & 1u) ? a : 0.0;
    if (lhs < cut.rhs - 1e-9) return false;
  }
  return true;
}

// Returns false on a violation; `applied` tells whether the cut was built.
bool aggregated_cut_valid(const std::vector<double>& e, double F, const std::vector<double>& probs, double delta,
                          bool& applied) {
  const auto ts = make_two_sided_set(e, F, droppable_count(probs, delta));
  applied = aggregated_precondition(ts);
  if (!applied) return true;
  const auto cut = build_aggregated_cut(ts);
  const std::size_t n = e.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double used = 0.0;
    for (std::size_t i = 0; i < n; ++i) used += (mask >> i & 1u) ? probs[i] : 0.0;
    if (used > delta + 1e-12) continue;
    double lo = -HUGE_VAL, hi = HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) continue;
      lo = std::max(lo, e[i] - F);
      hi = std::min(hi, e[i] + F);
    }
    if (lo > hi + 1e-12) continue;
    double lhs = 0.0;
    for (const auto& [i, a] : cut.z) lhs += (mask >> i & 1u) ? a : 0.0;
    if (lhs < cut.rhs - 1e-9) return false;
  }
  return true;
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

double rel_err(double a, double ref) { return std::abs(a - ref) / std::max(std::abs(ref), 1e-12); }

bool sweep_passes(const DispatchDecision& d, const GridCase& c, double q, int points, std::string* first_fail) {
  std::vector<double> dps;
  for (int k = 0; k < points; ++k) dps.push_back(-q + 2.0 * q * k / (points - 1));
  const auto rep = verify_decision(d, c, dps);
  for (const auto& ch : rep.checks) {
    if (ch.passed()) continue;
    if (first_fail) {
      *first_fail = fmt("dp %.2f MW: rocof %.3f Hz/s, nadir %.3f Hz, ss %.3f Hz%s", ch.dp_mw, ch.m.rocof, ch.m.nadir,
                        ch.m.ss_dev, ch.headroom_ok ? "" : ", headroom");
    }
    return false;
  }
  return true;
}

struct Verdict {
  int id;
  bool pass;
  std::string detail;
};

}  // namespace

int main() {
  const auto t_start = std::chrono::steady_clock::now();
  const bool have_highs = std::system("python3 -c 'import scipy.optimize' > /dev/null 2>&1") == 0;
  SolveOptions large;
  large.time_limit_s = 300.0;
  large.backend = have_highs ? std::string("exec:") + JCEDKIT_HIGHS_SCRIPT : "embedded";
  SolveOptions small;
  small.backend = "embedded";
  std::printf("backend for n >= 500: %s\n", have_highs ? "HiGHS via scipy (exec)" : "embedded (scipy not found)");
  std::printf("backend for small instances: embedded\n\n");

  const auto six = load("six_bus");
  const auto six_u = uncertainty("six_bus", six);
  std::vector<Instance> all;
  std::vector<Verdict> verdicts;

  std::printf("solving instances\n");
  // Large-n six-bus points share seed 7.
  std::vector<std::size_t> large_idx;
  for (std::size_t n : {500, 1000, 2000}) {
    large_idx.push_back(all.size());
    all.push_back(run_instance(fmt("six_bus po n=%zu seed=7", n), six, sample_scenarios(six_u, six, n, 7),
                               BuildMode::po(), large));
  }
  const std::size_t po1000 = large_idx[1];
  const std::size_t up1000 = all.size();
  all.push_back(run_instance("six_bus up n=1000 seed=7", six, all[po1000].set, BuildMode::up(), large));

  all.push_back(run_instance("six_bus po n=100 seed=3", six, sample_scenarios(six_u, six, 100, 3), BuildMode::po(), small));
  all.push_back(run_instance("six_bus po n=200 seed=4", six, sample_scenarios(six_u, six, 200, 4), BuildMode::po(), small));
  all.push_back(run_instance("six_bus up n=100 seed=3", six, sample_scenarios(six_u, six, 100, 3), BuildMode::up(), small));
  all.push_back(run_instance("six_bus fix(H=2,D=4) n=100 seed=3", six, sample_scenarios(six_u, six, 100, 3),
                             BuildMode::fix(InverterSettings::uniform(six, 2.0, 4.0)), small));
  {
    auto c = six;
    c.thresholds.delta_r = 0.0;
    all.push_back(run_instance("six_bus po delta_R=0 n=100 seed=5", c, sample_scenarios(six_u, c, 100, 5),
                               BuildMode::po(), small));
  }
  {
    const auto c39 = load("synthetic_39");
    all.push_back(run_instance("synthetic_39 po n=40 seed=5", c39, sample_scenarios(uncertainty("synthetic_39", c39), c39, 40, 5),
                               BuildMode::po(), small));
  }
  // Three randomized delta = 0 instances.
  std::vector<std::size_t> zero_idx;
  {
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> load_scale(0.85, 1.05), fc_scale(0.9, 1.1);
    std::uniform_int_distribution<int> n_dist(30, 90);
    for (int k = 0; k < 3; ++k) {
      auto c = six;
      for (auto& b : c.buses) b.load_mw *= load_scale(rng);
      for (auto& w : c.dibr) w.forecast_mw = std::min(w.capacity_mw, w.forecast_mw * fc_scale(rng));
      c.thresholds.delta_f = c.thresholds.delta_dibr = c.thresholds.delta_line = 0.0;
      const std::size_t n = n_dist(rng);
      const std::uint64_t seed = rng() % 100000;
      zero_idx.push_back(all.size());
      all.push_back(run_instance(fmt("six_bus random#%d delta=0 n=%zu", k + 1, n), c,
                                 sample_scenarios(uncertainty("six_bus", c), c, n, seed), BuildMode::po(), small));
    }
  }
  std::printf("\n");

  // 1. Relaxation ordering.
  {
    bool ok = true;
    int count = 0;
    double worst = HUGE_VAL;
    std::string bad;
    for (const auto& in : all) {
      if (!in.msaa.solution.optimal() || !in.robust.solution.optimal() || !in.saa.has_decision) {
        ok = false;
        bad += " " + in.label + " (not solved)";
        continue;
      }
      const double a = in.msaa.solution.objective, b = in.saa.solution.objective, r = in.robust.solution.objective;
      const double g1 = (b - a) / std::abs(b), g2 = (r - b) / std::abs(r);
      worst = std::min({worst, g1, g2});
      if (g1 < -1e-6 || g2 < -1e-6) {
        ok = false;
        bad += " " + in.label;
      }
      ++count;
    }
    verdicts.push_back({1, ok, fmt("msaa <= saa <= robust on %d instances, smallest relative gap %.3g", count, worst) +
                                   (bad.empty() ? "" : ";" + bad)});
  }

  // 2. MSAA accuracy, 3. speed.
  {
    bool ok = true;
    std::string detail;
    for (std::size_t i : large_idx) {
      const auto& in = all[i];
      const double err = std::abs(in.saa.solution.objective - in.msaa.solution.objective) / in.saa.solution.objective;
      const bool point_ok = in.saa.solution.optimal() && in.msaa.solution.optimal() && err <= 0.02 &&
                            in.saa.wall_time_s() <= 300.0 && in.msaa.wall_time_s() <= 300.0;
      ok = ok && point_ok;
      detail += fmt("%sn=%zu %.3f%% (saa %s %.1f s)", detail.empty() ? "" : ", ", in.set.size(), 100.0 * err,
                    to_string(in.saa.solution.status), in.saa.wall_time_s());
    }
    verdicts.push_back({2, ok, "|saa-msaa|/saa <= 2%: " + detail});
    const auto& in = all[large_idx[2]];
    const double ratio = in.msaa.wall_time_s() / in.saa.wall_time_s();
    verdicts.push_back({3, in.saa.solution.optimal() && ratio <= 0.5,
                        fmt("n=2000 msaa %.2f s vs saa %.2f s (%s), ratio %.3f <= 0.5", in.msaa.wall_time_s(),
                            in.saa.wall_time_s(), to_string(in.saa.solution.status), ratio)});
  }

  // 4. Mixing-cut validity by enumeration.
  {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> len(1, 12), val(0, 10);
    std::uniform_real_distribution<double> del(0.0, 0.6), pw(0.1, 1.0), ev(-9.0, 9.0), cap(3.0, 12.0);
    int trials = 0, violations = 0, applied = 0;
    for (int t = 0; t < 10000; ++t) {
      const int n = len(rng);
      std::vector<double> rhs(n), probs(n);
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        rhs[i] = val(rng) - 4.0 + (t % 3 == 0 ? pw(rng) : 0.0);
        probs[i] = t % 2 ? pw(rng) : 1.0;
        s += probs[i];
      }
      for (auto& p : probs) p /= s;
      const double delta = del(rng);
      violations += !mixing_cut_valid(rhs, probs, delta, true);
      violations += !mixing_cut_valid(rhs, probs, delta, false);
      trials += 2;
    }
    for (int t = 0; t < 10000; ++t) {
      const int n = len(rng);
      std::vector<double> e(n);
      for (auto& x : e) x = t % 2 ? std::round(ev(rng)) : ev(rng);
      bool used = false;
      violations += !aggregated_cut_valid(e, cap(rng), std::vector<double>(n, 1.0 / n), del(rng), used);
      applied += used;
      ++trials;
    }
    verdicts.push_back({4, violations == 0,
                        fmt("%d enumeration trials with n <= 12 (%d aggregated cuts built), %d violations", trials,
                            applied, violations)});
  }

  // 5. SAA semantics on the training scenarios.
  {
    bool ok = true;
    int checked = 0;
    std::string worst;
    for (const auto& in : all) {
      if (!in.saa.has_decision) continue;
      for (const auto& f : training_violations(in.m, in.set, in.saa.solution.x)) {
        ++checked;
        if (f.count > f.allowed) {
          ok = false;
          worst += fmt(" %s/%s %zu > %zu", in.label.c_str(), f.family.c_str(), f.count, f.allowed);
        }
      }
    }
    verdicts.push_back({5, ok, fmt("%d family checks, every count <= floor(delta n)", checked) + worst});
  }

  // 6. Closed forms against the ODE on a 100-point grid.
  {
    const auto t0 = std::chrono::steady_clock::now();
    double e_rocof = 0.0, e_nadir = 0.0, e_ss = 0.0;
    for (int k = 1; k <= 100; ++k) {
      SfrAggregates a;
      a.H_G = 1.0 + 11.0 * halton(k, 2);
      a.D_O = 20.0 * halton(k, 3);
      a.R_G_inv = 5.0 + 25.0 * halton(k, 5);
      a.F_H = 0.15 + 0.3 * halton(k, 7);
      a.T_R = 4.0 + 8.0 * halton(k, 11);
      a.p_sys = 1000.0;
      const double dp = 100.0;
      SimConfig cfg;
      cfg.dp_mw = dp;
      cfg.horizon = 120.0;
      const auto m = metrics(simulate(a, cfg, 60.0));
      e_rocof = std::max(e_rocof, rel_err(m.rocof, rocof(dp, a, 60.0)));
      e_nadir = std::max(e_nadir, rel_err(m.nadir, nadir_closed_form(dp, a, 60.0).deviation_hz));
      e_ss = std::max(e_ss, rel_err(m.ss_dev, steady_state_dev(dp, a, 60.0)));
    }
    const double secs = seconds_since(t0);
    verdicts.push_back({6, e_rocof <= 0.01 && e_nadir <= 0.02 && e_ss <= 0.005 && secs <= 60.0,
                        fmt("max rel err rocof %.2e (<= 1%%), nadir %.2e (<= 2%%), ss %.2e (<= 0.5%%); %.1f s",
                            e_rocof, e_nadir, e_ss, secs)});
  }

  // 7. PWL boundary conservatism.
  {
    struct Target {
      const char* name;
      GridCase c;
      double dp;
    };
    const auto c39 = load("synthetic_39");
    std::vector<Target> targets{{"six_bus", six, all[po1000].m.quantiles.abs_dp_qF},
                                {"six_bus", six, 0.12 * six.net_load()},
                                {"synthetic_39", c39, 0.06 * c39.net_load()}};
    int fitted = 0, points = 0;
    double worst = -HUGE_VAL;
    bool ok = true;
    std::string fail;
    for (const auto& tg : targets) {
      const auto base = thermal_aggregate(tg.c);
      for (int M : {2, 4, 8}) {
        PwlBoundary b;
        try {
          b = fit_nadir_boundary(tg.c, tg.dp, M);
        } catch (const Error& e) {
          ok = false;
          fail += fmt(" %s dp=%.1f M=%d: %s", tg.name, tg.dp, M, e.what());
          continue;
        }
        ++fitted;
        for (int k = 0; k < 50; ++k) {
          const double D = b.d_lo + (b.d_hi - b.d_lo) * k / 49.0;
          auto a = base;
          a.H_W = std::max(0.0, b(D));
          a.D_W = D;
          const double excess = std::abs(nadir_closed_form(tg.dp, a, tg.c.f0_hz).deviation_hz) - tg.c.thresholds.nadir_max;
          worst = std::max(worst, excess);
          ok = ok && excess <= 1e-6;
          ++points;
        }
      }
    }
    verdicts.push_back({7, ok, fmt("%d boundaries (M in {2,4,8}), %d points, max |nadir| - limit %.3g Hz", fitted,
                                   points, worst) + fail});
  }

  // 8. Ex-post reliability.
  const auto test = sample_scenarios(six_u, six, 10000, 8);
  const auto ptdf = compute_ptdf(six);
  {
    const auto& po = all[po1000];
    const auto& up = all[up1000];
    bool ok = po.saa.has_decision && up.saa.has_decision;
    std::string detail;
    if (ok) {
      const auto rp = ex_post_evaluate(po.saa.decision, six, ptdf, test);
      const auto ru = ex_post_evaluate(up.saa.decision, six, ptdf, test);
      ok = rp.p_dibr_up <= 0.06 && rp.p_sfr <= 0.06 && rp.p_line <= 0.06 && ru.p_dibr_up > rp.p_dibr_up;
      detail = fmt("po-jced saa dibr %.2f%% sfr %.2f%% line %.2f%% (<= 6%%); up-iced dibr %.2f%% > %.2f%%",
                   100 * rp.p_dibr_up, 100 * rp.p_sfr, 100 * rp.p_line, 100 * ru.p_dibr_up, 100 * rp.p_dibr_up);
      if (po.msaa.has_decision) {
        const auto rm = ex_post_evaluate(po.msaa.decision, six, ptdf, test);
        std::printf("info: po-jced msaa deficiency dibr %.2f%% sfr %.2f%% line %.2f%%\n", 100 * rm.p_dibr_up,
                    100 * rm.p_sfr, 100 * rm.p_line);
      }
    } else {
      detail = "a required SAA run has no decision";
    }
    verdicts.push_back({8, ok, detail});
  }

  // 9. Frequency verification sweep up to the delta_F disturbance quantile.
  {
    const auto& po = all[po1000];
    const double q = po.m.quantiles.abs_dp_qF;
    std::string f_saa, f_msaa, f_fix;
    const bool saa_ok = po.saa.has_decision && sweep_passes(po.saa.decision, six, q, 21, &f_saa);
    const bool msaa_ok = po.msaa.has_decision && sweep_passes(po.msaa.decision, six, q, 21, &f_msaa);
    const auto fix = build_and_solve(six, po.set, BuildMode::fix(InverterSettings::uniform(six, 0.5, 1.0)),
                                     Method::Msaa, {}, {}, large);
    const bool fix_fails = fix.has_decision && !sweep_passes(fix.decision, six, q, 21, &f_fix);
    std::string detail = fmt("sweep |dp| <= %.2f MW, 21 points: po-jced saa %s, msaa %s; fix-jced(H=0.5,D=1) %s",
                             q, saa_ok ? "pass" : "fail", msaa_ok ? "pass" : "fail", fix_fails ? "fails" : "passes");
    if (!f_fix.empty()) detail += " (" + f_fix + ")";
    if (!f_saa.empty()) detail += "; saa " + f_saa;
    if (!f_msaa.empty()) detail += "; msaa " + f_msaa;
    verdicts.push_back({9, saa_ok && msaa_ok && fix_fails, detail});
  }

  // 10. delta = 0 collapse.
  {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t i : zero_idx) {
      const auto& in = all[i];
      if (!in.saa.solution.optimal() || !in.msaa.solution.optimal() || !in.robust.solution.optimal()) {
        ok = false;
        continue;
      }
      const double r = in.robust.solution.objective;
      const double e = std::max(rel_err(in.saa.solution.objective, r), rel_err(in.msaa.solution.objective, r));
      worst = std::max(worst, e);
      ok = ok && e <= 1e-6;
    }
    verdicts.push_back({10, ok, fmt("3 randomized instances, max relative spread %.3g (<= 1e-6)", worst)});
  }

  // 11. Exact redispatch cost never exceeds the C1 approximation.
  {
    bool ok = true;
    int solved = 0, uncapped = 0;
    double worst = -HUGE_VAL, saving = 0.0;
    for (const auto& in : all) {
      for (const MethodRun* r : {&in.saa, &in.msaa, &in.robust}) {
        if (!r->has_decision) continue;
        ++solved;
        const auto& d = r->decision;
        const auto ob = evaluate_objective(d, in.set, in.c, in.m.fuel_segments);
        const double scale = std::max(1.0, std::abs(ob.approx()));
        worst = std::max(worst, (ob.exact() - ob.approx()) / scale);
        saving = std::max(saving, ob.approx() - ob.exact());
        if (ob.exact() > ob.approx() + 1e-9 * scale) ok = false;
        bool capped = false;
        for (std::size_t g = 0; g < in.c.thermal.size(); ++g) {
          for (const auto& s : in.set.scenarios) {
            const double x = d.alpha[g] * s.dp_load;
            if (x > d.r_up[g] + 1e-9 || -x > d.r_dn[g] + 1e-9) capped = true;
          }
        }
        if (!capped) {
          ++uncapped;
          if (std::abs(ob.exact() - ob.approx()) > 1e-9 * scale) ok = false;
        }
      }
    }
    verdicts.push_back({11, ok && uncapped > 0,
                        fmt("%d solved decisions, exact <= approx (max (exact-approx)/approx %.3g, largest saving "
                            "%.4f $ over %d with a binding cap); equality on all %d with no binding cap",
                            solved, worst, saving, solved - uncapped, uncapped)});
  }

  std::printf("\n");
  int failed = 0;
  for (const auto& v : verdicts) {
    std::printf("criterion %2d: %s  %s\n", v.id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    failed += !v.pass;
  }
  std::printf("\n%d of %zu criteria passed in %.1f s\n", static_cast<int>(verdicts.size()) - failed, verdicts.size(),
              seconds_since(t_start));
  return failed == 0 ? 0 : 1;
}
