#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "json.hpp"

#include "jcedkit/dynamics.hpp"
#include "jcedkit/error.hpp"
#include "jcedkit/evaluator.hpp"
#include "jcedkit/model_io.hpp"

namespace py = pybind11;
using namespace jced;

namespace {

py::dict run_dict(const MethodRun& r) {
  py::dict d;
  d["method"] = to_string(r.method);
  d["status"] = to_string(r.solution.status);
  d["solver"] = r.solution.solver;
  d["objective"] = r.solution.objective;
  d["wall_time_s"] = r.wall_time_s();
  d["variables"] = r.vars;
  d["rows"] = r.rows;
  d["integers"] = r.integers;
  d["indicators"] = r.stats.indicators();
  d["mixing_cuts"] = r.stats.mixing_cuts();
  d["aggregated_cuts"] = r.stats.aggregated_cuts();
  d["has_decision"] = r.has_decision;
  if (r.has_decision) {
    d["decision"] = r.decision;
    d["objective_exact"] = r.cost.exact();
    d["objective_c1"] = r.cost.approx();
  }
  return d;
}

BuildMode make_mode(const GridCase& c, const std::string& mode, double fix_H, double fix_D) {
  switch (parse_mode(mode)) {
    case ModeKind::PoJced: return BuildMode::po();
    case ModeKind::UpIced: return BuildMode::up();
    case ModeKind::FixJced: return BuildMode::fix(InverterSettings::uniform(c, fix_H, fix_D));
  }
  return {};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "jcedkit core: case I/O, scenarios, model building, SAA/MSAA reformulation, solving, evaluation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<BackendError>(m, "BackendError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());

  py::class_<Thresholds>(m, "Thresholds")
      .def_readwrite("df_rate_max", &Thresholds::rocof_max)
      .def_readwrite("df_max", &Thresholds::nadir_max)
      .def_readwrite("df_ss_max", &Thresholds::ss_max)
      .def_readwrite("D_O", &Thresholds::damping)
      .def_readwrite("dt", &Thresholds::dt_h)
      .def_readwrite("delta_F", &Thresholds::delta_f)
      .def_readwrite("delta_DIBR", &Thresholds::delta_dibr)
      .def_readwrite("delta_SFR", &Thresholds::delta_sfr)
      .def_readwrite("delta_L", &Thresholds::delta_line)
      .def_readwrite("delta_R", &Thresholds::delta_r);

  py::class_<GridCase>(m, "GridCase")
      .def_readonly("name", &GridCase::name)
      .def_readonly("base_mva", &GridCase::base_mva)
      .def_readonly("f0_hz", &GridCase::f0_hz)
      .def_readwrite("thresholds", &GridCase::thresholds)
      .def_property_readonly("num_buses", [](const GridCase& c) { return c.buses.size(); })
      .def_property_readonly("num_lines", [](const GridCase& c) { return c.lines.size(); })
      .def_property_readonly("num_thermal", [](const GridCase& c) { return c.thermal.size(); })
      .def_property_readonly("num_dibr", [](const GridCase& c) { return c.dibr.size(); })
      .def_property_readonly("num_storage", [](const GridCase& c) { return c.storage.size(); })
      .def("net_load", &GridCase::net_load)
      .def("p_sys", &GridCase::p_sys)
      .def("validate", &GridCase::validate)
      .def("to_json", [](const GridCase& c) { return dump_case(c); });
  m.def("load_case", &load_case, py::arg("path"));
  m.def("parse_case", &parse_case, py::arg("text"), py::arg("source") = "<string>");

  py::class_<UncertaintyModel>(m, "UncertaintyModel")
      .def_static("deterministic", &UncertaintyModel::deterministic, py::arg("case"));
  m.def("load_uncertainty", &load_uncertainty, py::arg("path"), py::arg("case"));
  m.def("parse_uncertainty", &parse_uncertainty, py::arg("text"), py::arg("case"), py::arg("source") = "<string>");

  py::class_<ScenarioSet>(m, "ScenarioSet")
      .def("__len__", &ScenarioSet::size)
      .def_readonly("seed", &ScenarioSet::seed)
      .def_readonly("rng", &ScenarioSet::rng)
      .def("disturbances", &ScenarioSet::disturbances)
      .def("probabilities", &ScenarioSet::probabilities)
      .def("to_csv", [](const ScenarioSet& s, const GridCase& c) { return scenarios_to_csv(s, c); }, py::arg("case"));
  m.def("sample_scenarios", &sample_scenarios, py::arg("model"), py::arg("case"), py::arg("n"), py::arg("seed"),
        py::arg("jobs") = 1);
  m.def("scenarios_from_csv", &scenarios_from_csv, py::arg("text"), py::arg("case"), py::arg("source") = "<string>");
  m.def("disturbance_quantiles", [](const ScenarioSet& s, const Thresholds& t) {
    const auto q = disturbance_quantiles(s, t);
    py::dict d;
    d["abs_dp_qF"] = q.abs_dp_qF;
    d["dp_up_qR"] = q.dp_up_qR;
    d["dp_dn_qR"] = q.dp_dn_qR;
    return d;
  });

  py::class_<DispatchDecision>(m, "DispatchDecision")
      .def_readonly("p_g", &DispatchDecision::p_g)
      .def_readonly("r_up", &DispatchDecision::r_up)
      .def_readonly("r_dn", &DispatchDecision::r_dn)
      .def_readonly("alpha", &DispatchDecision::alpha)
      .def_readonly("p_w", &DispatchDecision::p_w)
      .def_readonly("H_w", &DispatchDecision::H_w)
      .def_readonly("D_w", &DispatchDecision::D_w)
      .def_readonly("p_e", &DispatchDecision::p_e)
      .def_readonly("H_e", &DispatchDecision::H_e)
      .def_readonly("D_e", &DispatchDecision::D_e)
      .def("to_json", [](const DispatchDecision& d, const GridCase& c) { return decision_to_json(d, c); });
  m.def("decision_from_json", &decision_from_json, py::arg("text"), py::arg("case"), py::arg("source") = "<string>");

  py::class_<SymbolicModel>(m, "SymbolicModel")
      .def_readonly("warnings", &SymbolicModel::warnings)
      .def_readonly("expected_abs_dp", &SymbolicModel::expected_abs_dp)
      .def_property_readonly("families",
                             [](const SymbolicModel& s) {
                               std::vector<std::string> f;
                               for (const auto& b : s.blocks) f.push_back(b.family);
                               return f;
                             })
      .def("to_json", [](const SymbolicModel& s) { return symbolic_to_json(s); });
  m.def(
      "build_model",
      [](const GridCase& c, const ScenarioSet& set, const std::string& mode, double fix_H, double fix_D,
         int fuel_segments, int nadir_pieces) {
        BuildOptions o;
        o.fuel_segments = fuel_segments;
        o.nadir_pieces = nadir_pieces;
        return build_model(c, set, make_mode(c, mode, fix_H, fix_D), o);
      },
      py::arg("case"), py::arg("scenarios"), py::arg("mode") = "po-jced", py::arg("fix_H") = 0.0,
      py::arg("fix_D") = 0.0, py::arg("fuel_segments") = 3, py::arg("nadir_pieces") = 4);

  m.def(
      "solve",
      [](const SymbolicModel& sm, const GridCase& c, const ScenarioSet& set, const std::string& method,
         const std::string& backend, double time_limit, double gap, bool strengthen) {
        ReformOptions ro;
        ro.strengthen = strengthen;
        SolveOptions so;
        so.backend = backend;
        so.time_limit_s = time_limit;
        so.gap = gap;
        py::gil_scoped_release release;
        auto r = run_method(sm, c, set, parse_method(method), ro, so);
        py::gil_scoped_acquire acquire;
        return run_dict(r);
      },
      py::arg("model"), py::arg("case"), py::arg("scenarios"), py::arg("method") = "msaa", py::arg("backend") = "",
      py::arg("time_limit") = 300.0, py::arg("gap") = 1e-6, py::arg("strengthen") = true);

  m.def(
      "export_model",
      [](const SymbolicModel& sm, const ScenarioSet& set, const std::string& method, const std::string& fmt) {
        const auto p = reformulate(sm, set, parse_method(method));
        return parse_model_format(fmt) == ModelFormat::Mps ? write_mps(p) : write_lp(p);
      },
      py::arg("model"), py::arg("scenarios"), py::arg("method") = "msaa", py::arg("format") = "mps");

  m.def(
      "ex_post_evaluate",
      [](const DispatchDecision& d, const GridCase& c, const ScenarioSet& test, double shed_price) {
        return py::module_::import("json").attr("loads")(
            report_json(ex_post_evaluate(d, c, compute_ptdf(c), test, shed_price)));
      },
      py::arg("decision"), py::arg("case"), py::arg("test"), py::arg("shed_price") = 5000.0);

  m.def(
      "evaluate_objective",
      [](const DispatchDecision& d, const ScenarioSet& set, const GridCase& c) {
        const auto b = evaluate_objective(d, set, c);
        py::dict out;
        out["exact"] = b.exact();
        out["c1"] = b.approx();
        out["fuel"] = b.fuel;
        out["reserve"] = b.reserve;
        out["curtailment"] = b.curtailment;
        out["storage"] = b.storage;
        out["redispatch_exact"] = b.redispatch_exact;
        out["redispatch_c1"] = b.redispatch_c1;
        return out;
      },
      py::arg("decision"), py::arg("scenarios"), py::arg("case"));

  m.def(
      "verify_decision",
      [](const DispatchDecision& d, const GridCase& c, const std::vector<double>& dps) {
        const auto rep = verify_decision(d, c, dps);
        py::list checks;
        for (const auto& k : rep.checks) {
          py::dict e;
          e["dp_mw"] = k.dp_mw;
          e["rocof"] = k.m.rocof;
          e["nadir"] = k.m.nadir;
          e["ss_dev"] = k.m.ss_dev;
          e["passed"] = k.passed();
          checks.append(e);
        }
        py::dict out;
        out["passed"] = rep.passed();
        out["checks"] = checks;
        return out;
      },
      py::arg("decision"), py::arg("case"), py::arg("disturbances_mw"));

  py::class_<SfrAggregates>(m, "SfrAggregates")
      .def(py::init<>())
      .def_readwrite("H_G", &SfrAggregates::H_G)
      .def_readwrite("H_W", &SfrAggregates::H_W)
      .def_readwrite("H_E", &SfrAggregates::H_E)
      .def_readwrite("D_W", &SfrAggregates::D_W)
      .def_readwrite("D_E", &SfrAggregates::D_E)
      .def_readwrite("R_G_inv", &SfrAggregates::R_G_inv)
      .def_readwrite("F_H", &SfrAggregates::F_H)
      .def_readwrite("T_R", &SfrAggregates::T_R)
      .def_readwrite("D_O", &SfrAggregates::D_O)
      .def_readwrite("p_sys", &SfrAggregates::p_sys);
  m.def("thermal_aggregate", &thermal_aggregate, py::arg("case"));
  m.def("rocof", &rocof, py::arg("dp_mw"), py::arg("agg"), py::arg("f0"));
  m.def("steady_state_dev", &steady_state_dev, py::arg("dp_mw"), py::arg("agg"), py::arg("f0"));
  m.def(
      "nadir", [](double dp, const SfrAggregates& a, double f0) { return nadir_closed_form(dp, a, f0).deviation_hz; },
      py::arg("dp_mw"), py::arg("agg"), py::arg("f0"));
  m.def(
      "simulate_metrics",
      [](const SfrAggregates& a, double dp, double f0, double horizon, double step) {
        SimConfig cfg;
        cfg.dp_mw = dp;
        cfg.horizon = horizon;
        cfg.step = step;
        const auto mt = metrics(simulate(a, cfg, f0));
        py::dict d;
        d["rocof"] = mt.rocof;
        d["nadir"] = mt.nadir;
        d["nadir_time"] = mt.nadir_time;
        d["ss_dev"] = mt.ss_dev;
        return d;
      },
      py::arg("agg"), py::arg("dp_mw"), py::arg("f0"), py::arg("horizon") = 60.0, py::arg("step") = 1e-3);

  m.def(
      "mixing_cut",
      [](const std::vector<double>& rhs, const std::vector<double>& probs, double delta, bool strengthen) {
        const auto ms = make_mixing_set(rhs, probs, delta, strengthen);
        const auto cut = build_mixing_cut(ms);
        py::dict d;
        d["base"] = ms.base;
        d["w"] = ms.w;
        d["order"] = ms.order;
        d["k"] = ms.k;
        d["z"] = cut.z;
        d["rhs"] = cut.rhs;
        return d;
      },
      py::arg("rhs"), py::arg("probs"), py::arg("delta"), py::arg("strengthen") = true);
  m.def("droppable_count", &droppable_count, py::arg("probs"), py::arg("delta"));
}
