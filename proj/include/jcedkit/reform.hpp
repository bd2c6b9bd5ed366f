#pragma once

#include <string>
#include <vector>

#include "jcedkit/program.hpp"
#include "jcedkit/symbolic_model.hpp"

namespace jced {

enum class Method { Saa, Msaa, Robust };

const char* to_string(Method m);
Method parse_method(const std::string& s);

struct ReformOptions {
  // Raise the base value to the (k+1)-th largest right side so that only the
  // k largest offsets stay positive (quantile strengthening).
  bool strengthen = true;
  bool mixing_cuts = true;      // MSAA only
  bool aggregated_cuts = true;  // MSAA only, line blocks
};

// Largest number of scenarios whose total probability stays within delta.
std::size_t droppable_count(const std::vector<double>& probs, double delta);

// One chance row in mixing form: lhs - y = base, y >= w_i (1 - z_i), y >= 0.
struct MixingSet {
  double base = 0.0;
  std::vector<double> w;    // per scenario, >= 0
  std::vector<int> order;   // cut subsequence, w nonincreasing along it
  std::size_t k = 0;        // droppable scenarios under the budget
  double delta = 0.0;
};

// rhs and probs are per scenario. Throws NumericalError if an offset would
// come out negative.
MixingSet make_mixing_set(const std::vector<double>& rhs, const std::vector<double>& probs, double delta,
                          bool strengthen);

// y coefficient is 1; z coefficients are per scenario index.
struct MixingCut {
  std::vector<std::pair<int, double>> z;
  double rhs = 0.0;
};

// y + sum_s (w_{j_s} - w_{j_{s+1}}) z_{j_s} >= w_{j_1}, terminal offset 0.
// Throws ValidationError if the subsequence is not sorted.
MixingCut build_mixing_cut(const MixingSet& ms);

// The pair A x >= -F + e_i, -A x >= -F - e_i of one line, shifted by the
// midrange c of e so that v_low = F + e - c and v_up = F - e + c, and
// y_low + y_up = 2 y_c with y_c = 2F.
struct TwoSidedMixingSet {
  double capacity = 0.0;
  double center = 0.0;
  double y_c = 0.0;
  double u_a = 0.0;  // max v_low
  std::vector<double> v_low, v_up;
  std::vector<int> tau_r, tau_g;
};

TwoSidedMixingSet make_two_sided_set(const std::vector<double>& e, double capacity, std::size_t k);

// 2 y_c + sum_{tau_R} (v_low drops) z + sum_{tau_G} (v_up drops) z >= v_low_1 + v_up_1,
// emitted with the constant moved right. Throws ValidationError unless
// v_low_i, v_up_i >= 0.
MixingCut build_aggregated_cut(const TwoSidedMixingSet& ts);
bool aggregated_precondition(const TwoSidedMixingSet& ts);

struct BlockStats {
  std::string family;
  std::size_t rows = 0;
  std::size_t k = 0;
  std::size_t indicators = 0;
  std::size_t mixing_rows = 0;
  std::size_t mixing_cuts = 0;
  std::size_t aggregated_cuts = 0;
  std::size_t aggregated_skipped = 0;
  bool robust = false;
  bool vacuous = false;
};

struct ReformStats {
  std::vector<BlockStats> blocks;
  std::size_t indicators() const;
  std::size_t mixing_cuts() const;
  std::size_t aggregated_cuts() const;
};

// Deterministic rows pass through; each chance block becomes
//   saa:    binary z, y variables, mixing rows, budget sum p_i z_i <= delta
//   msaa:   the same with z in [0, 1] plus mixing and aggregated cuts
//   robust: lhs >= max_i rhs_i, no indicators
// Row order follows block order, then row order within a block.
CanonicalProgram reformulate(const SymbolicModel& m, const ScenarioSet& set, Method method,
                             const ReformOptions& opts = {}, ReformStats* stats = nullptr);

}  // namespace jced
