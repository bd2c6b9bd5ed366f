#pragma once

#include <string>

#include "jcedkit/builder.hpp"
#include "jcedkit/reform.hpp"
#include "jcedkit/solver.hpp"

namespace jced {

// One reformulate-and-solve pass of a built model.
struct MethodRun {
  Method method = Method::Msaa;
  ReformStats stats;
  int vars = 0;
  int rows = 0;
  int integers = 0;
  std::size_t nnz = 0;
  double reform_time_s = 0.0;
  Solution solution;
  bool has_decision = false;
  DispatchDecision decision;
  ObjectiveBreakdown cost;  // on the training scenarios

  double wall_time_s() const { return reform_time_s + solution.wall_time_s; }
};

MethodRun run_method(const SymbolicModel& m, const GridCase& c, const ScenarioSet& set, Method method,
                     const ReformOptions& ropts = {}, const SolveOptions& sopts = {});

// Convenience for the common path: build, reformulate, solve.
MethodRun build_and_solve(const GridCase& c, const ScenarioSet& set, const BuildMode& mode, Method method,
                          const BuildOptions& bopts = {}, const ReformOptions& ropts = {},
                          const SolveOptions& sopts = {});

// Names the row family behind an infeasible model: a deterministic row family
// whose removal restores feasibility, else the first chance family ("freq",
// "dibr_up", "line_flow") whose relaxed rows make the program infeasible.
// Empty when every probe is feasible.
std::string diagnose_infeasibility(const SymbolicModel& m, const ScenarioSet& set, const SolveOptions& sopts = {});

// Copy of p without the rows tagged `family`.
CanonicalProgram drop_family(const CanonicalProgram& p, const std::string& family);

}  // namespace jced
