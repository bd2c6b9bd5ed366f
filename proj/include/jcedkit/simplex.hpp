#pragma once

#include <chrono>
#include <memory>
#include <vector>

#include "jcedkit/program.hpp"

namespace jced {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit, Numerical };

const char* to_string(LpStatus s);

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_every = 64;
  long max_iterations = 5'000'000;
  int degenerate_switch = 50;  // consecutive degenerate pivots before Bland's rule
  bool scale = true;
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
};

// Per-column state of a basis over structural columns followed by one
// logical column per row.
struct Basis {
  enum : signed char { kBasic = 0, kLower = 1, kUpper = 2, kFree = 3 };
  std::vector<signed char> status;
  bool empty() const { return status.empty(); }
};

// Bounded revised simplex on the computational form A x + s = 0 with the
// logicals s bounded by the negated row bounds. The basis is factored with a
// sparse LU and updated in product form between refactorizations. solve()
// runs the dual simplex when the starting basis is dual feasible but primal
// infeasible (the usual case after a bound change) and the composite primal
// simplex otherwise. Integrality markers are ignored.
class LpSolver {
 public:
  explicit LpSolver(const CanonicalProgram& p, SimplexOptions opts = {});
  ~LpSolver();
  LpSolver(const LpSolver&) = delete;
  LpSolver& operator=(const LpSolver&) = delete;

  int num_cols() const;
  int num_rows() const;

  // Structural column bounds in the program's units.
  void set_bounds(int j, double lb, double ub);
  double lower(int j) const;
  double upper(int j) const;

  void set_deadline(std::chrono::steady_clock::time_point t);

  LpStatus solve();

  Basis basis() const;
  void set_basis(const Basis& b);  // falls back to the slack basis if b does not fit

  // Valid after Optimal: structural values and objective (with offset).
  std::vector<double> primal() const;
  double objective() const;
  long iterations() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot solve of the continuous relaxation.
struct LpResult {
  LpStatus status = LpStatus::Numerical;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
};

LpResult solve_lp(const CanonicalProgram& p, const SimplexOptions& opts = {});

}  // namespace jced
