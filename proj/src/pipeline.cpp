#include "jcedkit/pipeline.hpp"

#include <chrono>

namespace jced {

MethodRun run_method(const SymbolicModel& m, const GridCase& c, const ScenarioSet& set, Method method,
                     const ReformOptions& ropts, const SolveOptions& sopts) {
  MethodRun run;
  run.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  const auto prog = reformulate(m, set, method, ropts, &run.stats);
  run.reform_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.vars = prog.num_vars();
  run.rows = prog.num_rows();
  run.integers = prog.num_integers();
  run.nnz = prog.nnz();
  run.solution = solve(prog, sopts);
  if (!run.solution.x.empty()) {
    run.decision = extract_decision(m, run.solution.x);
    run.has_decision = true;
    run.cost = evaluate_objective(run.decision, set, c, m.fuel_segments);
  }
  return run;
}

MethodRun build_and_solve(const GridCase& c, const ScenarioSet& set, const BuildMode& mode, Method method,
                          const BuildOptions& bopts, const ReformOptions& ropts, const SolveOptions& sopts) {
  const auto m = build_model(c, set, mode, bopts);
  return run_method(m, c, set, method, ropts, sopts);
}

CanonicalProgram drop_family(const CanonicalProgram& p, const std::string& family) {
  CanonicalProgram out;
  out.name = p.name;
  out.vars = p.vars;
  out.obj = p.obj;
  out.obj_offset = p.obj_offset;
  std::vector<int> remap(p.rows.size(), -1);
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    if (p.rows[r].family == family) continue;
    remap[r] = static_cast<int>(out.rows.size());
    out.rows.push_back(p.rows[r]);
  }
  for (const auto& t : p.triplets) {
    if (remap[t.row] >= 0) out.triplets.push_back({remap[t.row], t.col, t.val});
  }
  out.assemble();
  return out;
}

std::string diagnose_infeasibility(const SymbolicModel& m, const ScenarioSet& set, const SolveOptions& sopts) {
  auto feasible = [&](const CanonicalProgram& p) { return solve(p, sopts).status != SolveStatus::Infeasible; };
  if (!feasible(m.det)) {
    for (const auto& [family, count] : m.det.family_counts()) {
      if (feasible(drop_family(m.det, family))) return family;
    }
    return "deterministic";
  }
  SymbolicModel probe = m;
  probe.blocks.clear();
  for (const auto& b : m.blocks) {
    probe.blocks.push_back(b);
    if (!feasible(reformulate(probe, set, Method::Msaa))) return to_string(b.kind);
  }
  return {};
}

}  // namespace jced
