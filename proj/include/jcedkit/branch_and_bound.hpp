#pragma once

#include <cstdint>
#include <vector>

#include "jcedkit/program.hpp"
#include "jcedkit/simplex.hpp"

namespace jced {

struct MipOptions {
  double rel_gap = 1e-6;
  double abs_gap = 1e-9;
  double time_limit_s = 300.0;
  long node_limit = 10'000'000;
  double int_tol = 1e-6;
  int heuristic_every = 50;  // nodes between rounding heuristics; 0 disables
  std::uint64_t seed = 0;    // accepted for interface stability; the search is deterministic
  SimplexOptions lp;
};

enum class MipStatus { Optimal, Infeasible, Unbounded, Limit, Numerical };

const char* to_string(MipStatus s);

struct MipResult {
  MipStatus status = MipStatus::Numerical;
  double objective = kInf;  // incumbent
  double bound = -kInf;     // best remaining node bound
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;
  bool has_solution() const { return !x.empty(); }
};

// Best-first branch-and-bound on the most fractional integer variable. Child
// nodes start from the parent's optimal basis (dual simplex). Rounding
// heuristics fix the integers to rounded LP values and re-solve.
MipResult branch_and_bound(const CanonicalProgram& p, const MipOptions& opts = {});

}  // namespace jced
