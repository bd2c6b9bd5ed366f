#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "jcedkit/dynamics.hpp"
#include "jcedkit/error.hpp"
#include "jcedkit/evaluator.hpp"
#include "jcedkit/model_io.hpp"
#include "jcedkit/run_config.hpp"

using namespace jced;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kInput = 2, kInfeasible = 3, kBackend = 4 };

// Flag values before they are merged over the config file.
struct Flags {
  std::string case_path, config, out, backend, uncertainty, scenarios, mode, decision, history, format, file;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::vector<long long> n;
  std::vector<std::string> methods, thresholds;
  double fix_H = 0.0, fix_D = 0.0, time_limit = 0.0, gap = 0.0;
  std::vector<double> sweep_mw;
  bool quantile_sweep = false;
  std::size_t test_n = 0;
  std::uint64_t test_seed = 0;
  int repeats = 1;
  bool no_strengthen = false;
};

struct Given {
  CLI::App* app = nullptr;
  bool operator()(const std::string& name) const {
    for (auto* a = app; a; a = a->get_parent()) {
      const CLI::Option* o = nullptr;
      try {
        o = a->get_option(name);
      } catch (const CLI::OptionNotFound&) {
        continue;
      }
      if (o->count() > 0) return true;
    }
    return false;
  }
};

RunConfig merge(const Flags& f, const Given& given) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_run_config(f.config);
  if (given("--case")) cfg.case_path = f.case_path;
  if (given("--out")) cfg.out_dir = f.out;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--jobs")) cfg.jobs = f.jobs;
  // Flag beats environment beats config file.
  if (given("--backend")) {
    cfg.backend = f.backend;
  } else if (const char* env = std::getenv("JCEDKIT_BACKEND"); env && *env) {
    cfg.backend = env;
  }
  if (given("--uncertainty")) cfg.uncertainty_path = f.uncertainty;
  if (given("--scenarios")) cfg.scenarios_path = f.scenarios;
  if (given("--n")) {
    if (f.n.front() < 1) throw ValidationError("--n must be >= 1");
    cfg.n = static_cast<std::size_t>(f.n.front());
  }
  if (given("--method")) {
    cfg.methods.clear();
    for (const auto& m : f.methods) cfg.methods.push_back(parse_method(m));
  }
  if (given("--mode")) cfg.mode = parse_mode(f.mode);
  if (given("--fix-H")) cfg.fix_H = f.fix_H;
  if (given("--fix-D")) cfg.fix_D = f.fix_D;
  if ((given("--fix-H") || given("--fix-D")) && !given("--mode")) cfg.mode = ModeKind::FixJced;
  for (const auto& t : f.thresholds) {
    const auto [k, v] = parse_threshold_assignment(t);
    cfg.thresholds[k] = v;
  }
  if (given("--time-limit")) cfg.time_limit_s = f.time_limit;
  if (given("--gap")) cfg.gap = f.gap;
  if (given("--test-n")) cfg.test_n = f.test_n;
  if (given("--test-seed")) cfg.test_seed = f.test_seed;
  if (f.no_strengthen) cfg.strengthen = false;
  if (cfg.case_path.empty()) throw ValidationError("--case is required (or \"case\" in the config file)");
  cfg.validate();
  return cfg;
}

struct Inputs {
  GridCase grid;
  UncertaintyModel unc;
  ScenarioSet train;
};

GridCase load_grid(const RunConfig& cfg) {
  auto c = load_case(cfg.case_path);
  for (const auto& [k, v] : cfg.thresholds) apply_threshold(c.thresholds, k, v);
  c.validate();
  return c;
}

UncertaintyModel load_unc(const RunConfig& cfg, const GridCase& c) {
  auto path = cfg.uncertainty_path.empty() ? default_uncertainty_path(cfg.case_path) : cfg.uncertainty_path;
  if (std::filesystem::exists(path)) return load_uncertainty(path, c);
  std::cerr << "warning: no uncertainty file (" << path.string() << "); scenarios equal the forecast\n";
  return UncertaintyModel::deterministic(c);
}

Inputs load_inputs(const RunConfig& cfg, std::optional<std::size_t> n = std::nullopt) {
  Inputs in;
  in.grid = load_grid(cfg);
  in.unc = load_unc(cfg, in.grid);
  if (!cfg.scenarios_path.empty() && !n) {
    in.train = load_scenarios(cfg.scenarios_path, in.grid);
  } else {
    in.train = sample_scenarios(in.unc, in.grid, n.value_or(cfg.n), cfg.seed, cfg.jobs);
  }
  return in;
}

BuildMode build_mode(const RunConfig& cfg, const GridCase& c) {
  switch (cfg.mode) {
    case ModeKind::PoJced: return BuildMode::po();
    case ModeKind::UpIced: return BuildMode::up();
    case ModeKind::FixJced: return BuildMode::fix(InverterSettings::uniform(c, cfg.fix_H, cfg.fix_D));
  }
  return {};
}

BuildOptions build_options(const RunConfig& cfg) {
  BuildOptions o;
  o.fuel_segments = cfg.fuel_segments;
  o.nadir_pieces = cfg.nadir_pieces;
  return o;
}

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions o;
  o.backend = cfg.backend;
  o.time_limit_s = cfg.time_limit_s;
  o.gap = cfg.gap;
  o.seed = cfg.seed;
  return o;
}

ReformOptions reform_options(const RunConfig& cfg) {
  ReformOptions o;
  o.strengthen = cfg.strengthen;
  return o;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw ValidationError("cannot write " + p.string());
  out << text;
}

void print_warnings(const SymbolicModel& m) {
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
}

// Raises the exit-code errors for runs that produced no usable point.
void check_run(const MethodRun& r, const SymbolicModel& m, const ScenarioSet& set, const SolveOptions& sopts) {
  if (r.solution.status == SolveStatus::Infeasible) {
    auto fam = diagnose_infeasibility(m, set, sopts);
    if (fam.empty()) fam = "chance constraints (" + std::string(to_string(r.method)) + ")";
    throw InfeasibleError(fam, std::string(to_string(r.method)) + " model is infeasible; family: " + fam);
  }
  if (r.solution.status == SolveStatus::Unbounded) {
    throw NumericalError(std::string(to_string(r.method)) + " model is unbounded");
  }
  if (!r.has_decision) {
    throw BackendError(std::string(to_string(r.method)) + ": time limit reached without a feasible point");
  }
  if (r.solution.status == SolveStatus::Limit) {
    std::cerr << "warning: " << to_string(r.method) << " stopped at the time limit; reporting the incumbent (bound "
              << r.solution.bound << ")\n";
  }
}

json run_json(const MethodRun& r, const SymbolicModel& m, const ScenarioSet& set) {
  json j;
  j["method"] = to_string(r.method);
  j["status"] = to_string(r.solution.status);
  j["solver"] = r.solution.solver;
  j["objective"] = r.solution.objective;
  j["objective_exact"] = r.cost.exact();
  j["objective_c1"] = r.cost.approx();
  j["bound"] = r.solution.bound;
  j["wall_time_s"] = r.wall_time_s();
  j["reform_time_s"] = r.reform_time_s;
  j["solve_time_s"] = r.solution.wall_time_s;
  j["variables"] = r.vars;
  j["rows"] = r.rows;
  j["integers"] = r.integers;
  j["nonzeros"] = r.nnz;
  j["indicators"] = r.stats.indicators();
  j["mixing_cuts"] = r.stats.mixing_cuts();
  j["aggregated_cuts"] = r.stats.aggregated_cuts();
  j["nodes"] = r.solution.nodes;
  json fams = json::array();
  for (const auto& f : training_violations(m, set, r.solution.x)) {
    fams.push_back({{"family", f.family}, {"delta", f.delta}, {"violations", f.count}, {"allowed", f.allowed},
                    {"probability", f.probability}});
  }
  j["training_violations"] = fams;
  return j;
}

int cmd_sample(const RunConfig& cfg, const Flags& f) {
  auto c = load_grid(cfg);
  UncertaintyModel u = f.history.empty() ? load_unc(cfg, c) : fit_uncertainty_from_csv(f.history, c);
  const auto set = sample_scenarios(u, c, cfg.n, cfg.seed, cfg.jobs);
  const auto path = f.file.empty() ? cfg.out_dir / "scenarios.csv" : std::filesystem::path(f.file);
  write_file(path, scenarios_to_csv(set, c));
  const auto q = disturbance_quantiles(set, c.thresholds);
  std::printf("wrote %zu scenarios to %s (seed %llu)\n", set.size(), path.string().c_str(),
              static_cast<unsigned long long>(cfg.seed));
  std::printf("|dp_L| quantile (delta_F)  %.4f MW\ndp_L up/down (delta_R/2)   %.4f / %.4f MW\n", q.abs_dp_qF,
              q.dp_up_qR, q.dp_dn_qR);
  return kOk;
}

int cmd_solve(const RunConfig& cfg) {
  const auto in = load_inputs(cfg);
  const auto m = build_model(in.grid, in.train, build_mode(cfg, in.grid), build_options(cfg));
  print_warnings(m);
  const auto sopts = solve_options(cfg);
  const auto cmp = compare_methods(m, in.grid, in.train, cfg.methods, 1, reform_options(cfg), sopts);
  json report;
  report["case"] = in.grid.name;
  report["mode"] = to_string(cfg.mode);
  report["n"] = in.train.size();
  report["seed"] = in.train.seed;
  report["rng"] = in.train.rng;
  report["warnings"] = m.warnings;
  json runs = json::array();
  std::ostringstream text;
  for (const auto& r : cmp.runs) {
    check_run(r, m, in.train, sopts);
    const std::string tag = to_string(r.method);
    save_decision(r.decision, in.grid, cfg.out_dir / ("decision_" + tag + ".json"));
    export_model(reformulate(m, in.train, r.method, reform_options(cfg)), ModelFormat::Mps,
                 cfg.out_dir / ("model_" + tag + ".mps"));
    runs.push_back(run_json(r, m, in.train));
  }
  report["runs"] = runs;
  if (cmp.has_pair) {
    report["cost_error"] = cmp.cost_error;
    report["speedup"] = cmp.speedup;
  }
  text << "case " << in.grid.name << ", mode " << to_string(cfg.mode) << ", n " << in.train.size() << ", seed "
       << in.train.seed << "\n";
  text << comparison_text(cmp);
  for (const auto& r : cmp.runs) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-7s exact objective %.4f $ (C1 approximation %.4f $)\n", to_string(r.method),
                  r.cost.exact(), r.cost.approx());
    text << buf;
  }
  write_file(cfg.out_dir / "report.json", report.dump(2) + "\n");
  write_file(cfg.out_dir / "report.txt", text.str());
  std::cout << text.str();
  return kOk;
}

int cmd_verify(const RunConfig& cfg, const Flags& f) {
  if (f.decision.empty()) throw ValidationError("verify: --decision is required");
  const auto c = load_grid(cfg);
  const auto d = load_decision(f.decision, c);
  std::vector<double> sweep = f.sweep_mw;
  if (f.quantile_sweep) {
    const auto in = load_inputs(cfg);
    const double q = disturbance_quantiles(in.train, c.thresholds).abs_dp_qF;
    for (double s : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      sweep.push_back(s * q);
      sweep.push_back(-s * q);
    }
  }
  if (sweep.empty()) {
    for (double pct : {5.0, 10.0, 15.0, 20.0, 25.0}) {
      sweep.push_back(pct / 100.0 * c.net_load());
      sweep.push_back(-pct / 100.0 * c.net_load());
    }
  }
  const auto rep = verify_decision(d, c, sweep);
  const auto u = load_unc(cfg, c);
  const std::uint64_t test_seed = cfg.test_seed ? cfg.test_seed : cfg.seed + 1;
  const auto test = sample_scenarios(u, c, cfg.test_n, test_seed, cfg.jobs);
  const auto ex = ex_post_evaluate(d, c, compute_ptdf(c), test, cfg.shed_price, cfg.fuel_segments, cfg.jobs);

  std::ostringstream text;
  char buf[256];
  std::snprintf(buf, sizeof buf, "thresholds  RoCoF %.4g Hz/s, nadir %.4g Hz, steady state %.4g Hz\n", rep.rocof_max,
                rep.nadir_max, rep.ss_max);
  text << buf;
  text << "dp (MW)      RoCoF (Hz/s)  nadir (Hz)   ss (Hz)     result\n";
  json checks = json::array();
  for (const auto& k : rep.checks) {
    std::string why;
    if (!k.rocof_ok) why += " rocof";
    if (!k.nadir_ok) why += " nadir";
    if (!k.ss_ok) why += " steady-state";
    if (!k.headroom_ok) why += " headroom(" + k.headroom_detail + ")";
    std::snprintf(buf, sizeof buf, "%10.3f  %12.5f  %10.5f  %10.5f   %s%s\n", k.dp_mw, k.m.rocof, k.m.nadir, k.m.ss_dev,
                  k.passed() ? "pass" : "FAIL", why.c_str());
    text << buf;
    checks.push_back({{"dp_mw", k.dp_mw},
                      {"rocof_hz_s", k.m.rocof},
                      {"nadir_hz", k.m.nadir},
                      {"nadir_time_s", k.m.nadir_time},
                      {"ss_dev_hz", k.m.ss_dev},
                      {"rocof_ok", k.rocof_ok},
                      {"nadir_ok", k.nadir_ok},
                      {"ss_ok", k.ss_ok},
                      {"headroom_ok", k.headroom_ok},
                      {"headroom_detail", k.headroom_detail},
                      {"passed", k.passed()}});
  }
  text << "dynamics: " << (rep.passed() ? "pass" : "FAIL") << "\n\nex-post evaluation\n" << report_text(ex);
  json j;
  j["thresholds"] = {{"df_rate_max", rep.rocof_max}, {"df_max", rep.nadir_max}, {"df_ss_max", rep.ss_max}};
  j["checks"] = checks;
  j["dynamics_passed"] = rep.passed();
  j["ex_post"] = json::parse(report_json(ex));
  write_file(cfg.out_dir / "verify.json", j.dump(2) + "\n");
  write_file(cfg.out_dir / "verify.txt", text.str());
  std::cout << text.str();
  return kOk;
}

int cmd_compare(const RunConfig& cfg, const Flags& f, const Given& given) {
  std::vector<std::size_t> ns;
  for (long long n : f.n) {
    if (n < 1) throw ValidationError("--n must be >= 1");
    ns.push_back(static_cast<std::size_t>(n));
  }
  if (ns.empty()) ns.push_back(cfg.n);
  auto methods = cfg.methods;
  if (!given("--method") && methods == std::vector<Method>{Method::Msaa}) methods = {Method::Saa, Method::Msaa};
  const auto sopts = solve_options(cfg);
  json all = json::array();
  std::ostringstream text, csv;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const auto in = load_inputs(cfg, ns[k]);
    const auto m = build_model(in.grid, in.train, build_mode(cfg, in.grid), build_options(cfg));
    if (k == 0) print_warnings(m);
    const auto cmp = compare_methods(m, in.grid, in.train, methods, f.repeats, reform_options(cfg), sopts);
    for (const auto& r : cmp.runs) check_run(r, m, in.train, sopts);
    auto j = json::parse(comparison_json(cmp));
    j["n"] = ns[k];
    j["seed"] = cfg.seed;
    all.push_back(j);
    text << "n = " << ns[k] << " (seed " << cfg.seed << ")\n" << comparison_text(cmp) << "\n";
    csv << comparison_csv_rows(cmp, ns[k], k == 0);
  }
  write_file(cfg.out_dir / "compare.json", all.dump(2) + "\n");
  write_file(cfg.out_dir / "compare.txt", text.str());
  write_file(cfg.out_dir / "compare.csv", csv.str());
  std::cout << text.str();
  return kOk;
}

int cmd_export(const RunConfig& cfg, const Flags& f) {
  const auto in = load_inputs(cfg);
  const auto m = build_model(in.grid, in.train, build_mode(cfg, in.grid), build_options(cfg));
  print_warnings(m);
  const std::string fmt = f.format.empty() ? "mps" : f.format;
  const Method method = cfg.methods.front();
  std::filesystem::path path = f.file;
  if (fmt == "json") {
    if (path.empty()) path = cfg.out_dir / "model.json";
    write_file(path, symbolic_to_json(m) + "\n");
  } else {
    const auto mf = parse_model_format(fmt);
    if (path.empty()) path = cfg.out_dir / (std::string("model_") + to_string(method) + "." + fmt);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    export_model(reformulate(m, in.train, method, reform_options(cfg)), mf, path);
  }
  std::printf("wrote %s\n", path.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jcedkit: joint chance-constrained economic dispatch with frequency constraints"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--case", f.case_path, "case JSON file");
  app.add_option("--config", f.config, "run configuration JSON file");
  app.add_option("--seed", f.seed, "scenario seed");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--backend", f.backend, "embedded | exec:<path> (overrides $JCEDKIT_BACKEND)");
  app.add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--uncertainty", f.uncertainty, "uncertainty JSON (default: <case>.uncertainty.json)");
  app.add_option("--threshold", f.thresholds, "threshold override key=value (repeatable)");
  app.fallthrough();

  auto* sample = app.add_subcommand("sample", "draw a scenario set and write it as CSV");
  sample->add_option("--n", f.n, "scenario count")->expected(1);
  sample->add_option("--history", f.history, "historical CSV to fit the beta marginals from");
  sample->add_option("--file", f.file, "output file (default <out>/scenarios.csv)");

  auto add_model_flags = [&](CLI::App* s, bool multi_n) {
    auto* n = s->add_option("--n", f.n, "scenario count");
    if (!multi_n) n->expected(1);
    s->add_option("--scenarios", f.scenarios, "scenario CSV instead of sampling");
    s->add_option("--method", f.methods, "saa | msaa | robust (repeatable)");
    s->add_option("--mode", f.mode, "po-jced | fix-jced | up-iced");
    s->add_option("--fix-H", f.fix_H, "fixed inverter inertia (s) for fix-jced");
    s->add_option("--fix-D", f.fix_D, "fixed inverter droop (p.u.) for fix-jced");
    s->add_option("--time-limit", f.time_limit, "solver time limit (s)");
    s->add_option("--gap", f.gap, "relative MIP gap");
    s->add_flag("--no-strengthen", f.no_strengthen, "keep the raw offsets in the mixing rows");
  };
  auto* solve = app.add_subcommand("solve", "build, reformulate and solve; write decisions and a report");
  add_model_flags(solve, false);
  auto* verify = app.add_subcommand("verify", "frequency-dynamics sweep and ex-post evaluation of a decision");
  verify->add_option("--decision", f.decision, "decision JSON written by solve")->required();
  verify->add_option("--sweep-mw", f.sweep_mw, "disturbances (MW), default +-5..25% of net load");
  verify->add_flag("--quantile-sweep", f.quantile_sweep, "sweep up to the delta_F quantile of the training set");
  verify->add_option("--n", f.n, "training scenario count for --quantile-sweep")->expected(1);
  verify->add_option("--scenarios", f.scenarios, "training scenario CSV for --quantile-sweep");
  verify->add_option("--test-n", f.test_n, "ex-post test scenarios");
  verify->add_option("--test-seed", f.test_seed, "ex-post seed (default seed + 1)");
  auto* compare = app.add_subcommand("compare", "SAA versus MSAA cost and time, one row per method and n");
  add_model_flags(compare, true);
  compare->add_option("--repeats", f.repeats, "timing repeats per method")->check(CLI::PositiveNumber);
  auto* exp = app.add_subcommand("export-model", "write the reformulated program (mps, lp) or the symbolic model (json)");
  add_model_flags(exp, false);
  exp->add_option("--format", f.format, "mps | lp | json");
  exp->add_option("--file", f.file, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const Given given{sub};
    const RunConfig cfg = merge(f, given);
    std::filesystem::create_directories(cfg.out_dir);
    if (sub == sample) return cmd_sample(cfg, f);
    if (sub == solve) return cmd_solve(cfg);
    if (sub == verify) return cmd_verify(cfg, f);
    if (sub == compare) return cmd_compare(cfg, f, given);
    return cmd_export(cfg, f);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
