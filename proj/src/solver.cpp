#include "jcedkit/solver.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "jcedkit/error.hpp"
#include "jcedkit/model_io.hpp"
#include "jcedkit/numfmt.hpp"

namespace jced {

namespace fs = std::filesystem;

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Limit: return "limit";
  }
  return "?";
}

std::string resolve_backend(const std::string& requested) {
  std::string b = requested;
  if (b.empty()) {
    const char* env = std::getenv("JCEDKIT_BACKEND");
    b = env && *env ? env : "embedded";
  }
  if (b != "embedded" && b.rfind("exec:", 0) != 0) {
    throw BackendError("unknown backend '" + b + "' (expected embedded or exec:<path>)");
  }
  if (b == "exec:") throw BackendError("exec backend needs a path");
  return b;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

Solution solve_embedded(const CanonicalProgram& p, const SolveOptions& o) {
  Solution s;
  s.solver = "embedded:simplex+bnb";
  if (p.num_integers() == 0) {
    SimplexOptions lo;
    lo.deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(o.time_limit_s));
    const auto r = solve_lp(p, lo);
    s.lp_iterations = r.iterations;
    switch (r.status) {
      case LpStatus::Optimal:
        s.status = SolveStatus::Optimal;
        s.x = r.x;
        s.objective = r.objective;
        s.bound = r.objective;
        break;
      case LpStatus::Infeasible: s.status = SolveStatus::Infeasible; break;
      case LpStatus::Unbounded: s.status = SolveStatus::Unbounded; break;
      case LpStatus::TimeLimit:
      case LpStatus::IterationLimit: s.status = SolveStatus::Limit; break;
      case LpStatus::Numerical: throw NumericalError("embedded simplex lost numerical stability");
    }
    return s;
  }
  MipOptions mo;
  mo.rel_gap = o.gap;
  mo.time_limit_s = o.time_limit_s;
  mo.seed = o.seed;
  const auto r = branch_and_bound(p, mo);
  s.nodes = r.nodes;
  s.lp_iterations = r.lp_iterations;
  s.bound = r.bound;
  switch (r.status) {
    case MipStatus::Optimal: s.status = SolveStatus::Optimal; break;
    case MipStatus::Infeasible: s.status = SolveStatus::Infeasible; break;
    case MipStatus::Unbounded: s.status = SolveStatus::Unbounded; break;
    case MipStatus::Limit: s.status = SolveStatus::Limit; break;
    case MipStatus::Numerical: throw NumericalError("embedded branch-and-bound lost numerical stability");
  }
  if (r.has_solution()) {
    s.x = r.x;
    s.objective = r.objective;
  }
  return s;
}

Solution solve_exec(const CanonicalProgram& p, const SolveOptions& o, const std::string& exe) {
  static std::atomic<int> counter{0};
  const auto dir = fs::temp_directory_path() /
                   ("jcedkit_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::create_directories(dir);
  const auto model = dir / "model.mps";
  const auto sol = dir / "solution.txt";
  export_model(p, ModelFormat::Mps, model);
  const std::string cmd = "JCEDKIT_TIME_LIMIT=" + format_double(o.time_limit_s) + " JCEDKIT_GAP=" +
                          format_double(o.gap) + " " + shell_quote(exe) + " " + shell_quote(model.string()) + " " +
                          shell_quote(sol.string()) + " > " + shell_quote((dir / "log.txt").string()) + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream f(sol);
  if (rc != 0 || !f) {
    std::ifstream log(dir / "log.txt");
    std::stringstream ls;
    ls << log.rdbuf();
    fs::remove_all(dir);
    throw BackendError("backend " + exe + " failed (exit " + std::to_string(rc) + "): " + ls.str());
  }
  std::stringstream ss;
  ss << f.rdbuf();
  fs::remove_all(dir);
  const auto file = parse_solution(ss.str(), exe);

  Solution s;
  s.solver = "exec:" + exe;
  const std::string st = file.status.value_or(file.values.empty() ? "infeasible" : "optimal");
  if (st == "optimal") s.status = SolveStatus::Optimal;
  else if (st == "infeasible") s.status = SolveStatus::Infeasible;
  else if (st == "unbounded") s.status = SolveStatus::Unbounded;
  else if (st == "limit") s.status = SolveStatus::Limit;
  else throw BackendError("backend " + exe + " reported status '" + st + "'");
  if (!file.values.empty()) {
    s.x.resize(p.num_vars());
    for (int j = 0; j < p.num_vars(); ++j) {
      auto it = file.values.find(p.vars[j].name);
      if (it == file.values.end()) throw BackendError("backend solution lacks a value for " + p.vars[j].name);
      s.x[j] = it->second;
    }
    s.objective = p.objective_value(s.x);
    s.bound = s.objective;
  } else if (s.status == SolveStatus::Optimal) {
    throw BackendError("backend " + exe + " reported optimal without values");
  }
  return s;
}

}  // namespace

Solution solve(const CanonicalProgram& p, const SolveOptions& opts) {
  p.validate();
  const auto backend = resolve_backend(opts.backend);
  const auto t0 = std::chrono::steady_clock::now();
  Solution s = backend == "embedded" ? solve_embedded(p, opts) : solve_exec(p, opts, backend.substr(5));
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!s.x.empty()) {
    std::string where;
    s.max_violation = p.max_violation(s.x, true, &where);
    if (s.optimal() && s.max_violation > opts.feas_tol) {
      throw NumericalError("solution from " + s.solver + " violates " + where + " by " +
                           format_double(s.max_violation));
    }
  }
  return s;
}

}  // namespace jced
