#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jcedkit/branch_and_bound.hpp"
#include "jcedkit/program.hpp"

namespace jced {

enum class SolveStatus { Optimal, Infeasible, Unbounded, Limit };

const char* to_string(SolveStatus s);

struct SolveOptions {
  // "embedded" or "exec:<path>"; empty means $JCEDKIT_BACKEND, else embedded.
  std::string backend;
  double time_limit_s = 300.0;
  double gap = 1e-6;
  std::uint64_t seed = 0;
  double feas_tol = 1e-6;  // independent re-check of optimal solutions
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;  // column order of the program
  double wall_time_s = 0.0;
  std::string solver;     // backend identity
  long nodes = 0;
  long lp_iterations = 0;
  double bound = 0.0;     // MILP dual bound (embedded); equals objective for LPs
  double max_violation = 0.0;

  bool optimal() const { return status == SolveStatus::Optimal; }
  double value(const CanonicalProgram& p, const std::string& name) const { return x.at(p.var_index(name)); }
};

std::string resolve_backend(const std::string& requested);

// Blocking solve. Optimal answers are re-verified against every row and bound
// at feas_tol (integrality included); a violation raises NumericalError.
// Throws BackendError when an external backend cannot run or answers garbage.
Solution solve(const CanonicalProgram& p, const SolveOptions& opts = {});

}  // namespace jced
