#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jcedkit/grid.hpp"

namespace jced {

// Beta(a, b) mapped affinely onto [lo, hi]. lo == hi is a point mass at lo.
struct BetaSpec {
  double a = 2.0;
  double b = 2.0;
  double lo = 0.0;
  double hi = 0.0;

  static BetaSpec point(double v) { return {1.0, 1.0, v, v}; }
  bool degenerate() const { return lo == hi; }
  double mean() const { return lo + (hi - lo) * a / (a + b); }
  double variance() const {
    const double s = a + b;
    return (hi - lo) * (hi - lo) * a * b / (s * s * (s + 1.0));
  }
  void validate(const std::string& who) const;

  bool operator==(const BetaSpec&) const = default;
};

// Independent per-bus forecast errors and per-DIBR availability. Vectors are
// indexed in case order (buses, dibr).
struct UncertaintyModel {
  std::vector<BetaSpec> load_error;
  std::vector<BetaSpec> ibr_error;
  std::vector<BetaSpec> dibr_available;

  // All load/IBR errors zero and every DIBR available at its forecast.
  static UncertaintyModel deterministic(const GridCase& c);
  void validate(const GridCase& c) const;
};

// JSON document:
//   {"load_error": [{"bus": 1, "a": 2, "b": 2, "lo": -10, "hi": 10}, ...],
//    "ibr_error":  [...same with "bus"...],
//    "dibr_available": [{"dibr": 1, "a": 5, "b": 2, "lo": 0, "hi": 150}, ...]}
// Omitted buses are point masses at 0; omitted DIBRs are point masses at
// their forecast output. A DIBR spec without lo/hi spans [0, p_cap].
UncertaintyModel parse_uncertainty(const std::string& json_text, const GridCase& c,
                                   const std::string& source = "<string>");
UncertaintyModel load_uncertainty(const std::filesystem::path& path, const GridCase& c);

// Method-of-moments beta fit on the support [lo, hi].
BetaSpec fit_beta_moments(const std::vector<double>& samples, double lo, double hi);

struct Scenario {
  std::size_t index = 0;
  double prob = 0.0;
  std::vector<double> zeta_d;  // MW, per bus
  std::vector<double> zeta_h;  // MW, per bus
  double dp_load = 0.0;        // MW, sum over buses of zeta_d - zeta_h
  std::vector<double> pbar;    // MW, per DIBR
};

// Defines the aggregate disturbance; used for construction and for the exact
// consistency check on import.
double disturbance_of(const std::vector<double>& zeta_d, const std::vector<double>& zeta_h);

inline constexpr const char* kRngIdentifier = "mt19937_64/splitmix64(seed,i)/boost.random.beta_distribution";

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  std::uint64_t seed = 0;
  std::string rng = kRngIdentifier;

  std::size_t size() const { return scenarios.size(); }
  bool empty() const { return scenarios.empty(); }
  std::vector<double> disturbances() const;
  std::vector<double> probabilities() const;
  void validate(const GridCase& c) const;
};

// n equal-weight draws. Scenario i uses its own generator seeded from
// (seed, i), so the result does not depend on `jobs`.
ScenarioSet sample_scenarios(const UncertaintyModel& model, const GridCase& c, std::size_t n,
                             std::uint64_t seed, unsigned jobs = 1);

// Set of n scenarios that all equal the forecast (zero disturbance).
ScenarioSet forecast_scenarios(const GridCase& c, std::size_t n);

enum class QuantileSide { Upper, Lower };

// Upper: smallest v among values with P(X > v) <= delta.
// Lower: largest v among values with P(X < v) <= delta.
double empirical_quantile(const std::vector<double>& values, const std::vector<double>& probs, double delta,
                          QuantileSide side);

struct DisturbanceQuantiles {
  double abs_dp_qF = 0.0;  // upper delta_F quantile of |dp_L|
  double dp_up_qR = 0.0;   // upper delta_R/2 quantile of dp_L
  double dp_dn_qR = 0.0;   // lower delta_R/2 quantile of dp_L
};

DisturbanceQuantiles disturbance_quantiles(const ScenarioSet& set, const Thresholds& thr);

// CSV columns: i, p_i, dp_L, zeta_d_<bus>..., zeta_h_<bus>..., pbar_<dibr>...
// The seed and RNG identifier go into leading '#' comment lines.
std::string scenarios_to_csv(const ScenarioSet& set, const GridCase& c);
ScenarioSet scenarios_from_csv(const std::string& text, const GridCase& c, const std::string& source = "<string>");
void save_scenarios(const ScenarioSet& set, const GridCase& c, const std::filesystem::path& path);
ScenarioSet load_scenarios(const std::filesystem::path& path, const GridCase& c);

// Fits an uncertainty model from a historical CSV laid out like the scenario
// export (zeta_d_/zeta_h_/pbar_ columns; missing columns stay deterministic).
UncertaintyModel fit_uncertainty_from_csv(const std::filesystem::path& path, const GridCase& c);

}  // namespace jced
