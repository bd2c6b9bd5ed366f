#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jcedkit/pipeline.hpp"
#include "jcedkit/ptdf.hpp"

namespace jced {

struct ExPostReport {
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  double shed_price = 5000.0;  // $/MWh
  // Probability-weighted fraction of scenarios violating any row of a family.
  double p_dibr_up = 0.0;
  double p_sfr = 0.0;
  double p_line = 0.0;
  std::size_t n_dibr_up = 0, n_sfr = 0, n_line = 0;
  double expected_unmet_mw = 0.0;
  double objective_cost = 0.0;  // exact objective on the test scenarios, $
  double expost_cost = 0.0;     // shed_price * E[unmet MW] * dt, $
  double total_cost() const { return objective_cost + expost_cost; }
};

// Per-scenario checks of the DIBR up-headroom rows, SFR adequacy
// (alpha_g dp within [-r_dn, r_up]) and both reserve-deployment variants of
// every line flow. Deterministic for any `jobs`.
ExPostReport ex_post_evaluate(const DispatchDecision& d, const GridCase& c, const PtdfMatrix& ptdf,
                              const ScenarioSet& test, double shed_price = 5000.0, int fuel_segments = 3,
                              unsigned jobs = 1);

// Joint violations of the chance blocks of `m` at program solution x: a
// scenario counts once per family when any of the family's rows fails.
struct FamilyViolations {
  std::string family;
  std::size_t count = 0;
  double probability = 0.0;
  double delta = 0.0;
  std::size_t allowed = 0;  // droppable scenarios under delta
};

std::vector<FamilyViolations> training_violations(const SymbolicModel& m, const ScenarioSet& set,
                                                  const std::vector<double>& x, double tol = 1e-6);

struct Comparison {
  std::vector<MethodRun> runs;  // one per method, fastest of the repeats
  std::vector<std::vector<double>> times;  // per method, every repeat
  // (saa - msaa) / saa and saa_time / msaa_time, when both were run.
  double cost_error = 0.0;
  double speedup = 0.0;
  bool has_pair = false;
};

Comparison compare_methods(const SymbolicModel& m, const GridCase& c, const ScenarioSet& set,
                           const std::vector<Method>& methods, int repeats = 1, const ReformOptions& ropts = {},
                           const SolveOptions& sopts = {});

std::string report_json(const ExPostReport& r);
std::string report_text(const ExPostReport& r);
std::string comparison_json(const Comparison& cmp);
std::string comparison_text(const Comparison& cmp);
// One row per method: n, method, objective, wall time, status.
std::string comparison_csv_rows(const Comparison& cmp, std::size_t n, bool header);

}  // namespace jced
