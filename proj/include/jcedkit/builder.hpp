#pragma once

#include "jcedkit/decision.hpp"
#include "jcedkit/ptdf.hpp"
#include "jcedkit/symbolic_model.hpp"

namespace jced {

struct BuildOptions {
  int fuel_segments = 3;
  int nadir_pieces = 4;
  BoundaryOptions boundary;
};

// Full model: variables, objective, deterministic rows, SFR quantile rows,
// and the chance blocks. Fits the nadir boundary at the upper delta_F
// quantile of |dp_L| unless the mode fixes the inverter settings.
SymbolicModel build_model(const GridCase& c, const ScenarioSet& set, const BuildMode& mode,
                          const BuildOptions& opts = {});
SymbolicModel build_model(const GridCase& c, const ScenarioSet& set, const PtdfMatrix& ptdf, const BuildMode& mode,
                          const BuildOptions& opts = {});

// The stages of build_model, usable on a partially built model. Each assumes
// the variables already exist (add_variables first).
void add_variables(SymbolicModel& m, const GridCase& c, const BuildMode& mode, int fuel_segments);
void build_objective(SymbolicModel& m, const GridCase& c, const ScenarioSet& set);
void build_deterministic(SymbolicModel& m, const GridCase& c, const BuildMode& mode);
void build_sfr_quantile(SymbolicModel& m, const GridCase& c, const ScenarioSet& set, const BuildMode& mode);
void build_chance_blocks(SymbolicModel& m, const GridCase& c, const ScenarioSet& set, const PtdfMatrix& ptdf,
                         const PwlBoundary* boundary, const BuildMode& mode);

// Values of the piecewise-linear fuel curve the model optimizes ($/h).
double fuel_cost_pwl(const ThermalUnit& g, double p, int segments);

struct ObjectiveBreakdown {
  double fuel = 0.0;            // modeled (piecewise-linear) fuel cost
  double fuel_quadratic = 0.0;  // the original curve at the same p_g
  double reserve = 0.0;
  double curtailment = 0.0;
  double storage = 0.0;
  double redispatch_c1 = 0.0;     // |alpha dp| expectation
  double redispatch_exact = 0.0;  // with the min{., reserve} caps
  double approx() const { return fuel + reserve + curtailment + storage + redispatch_c1; }
  double exact() const { return fuel + reserve + curtailment + storage + redispatch_exact; }
};

// All terms in $ per dispatch period (rates times dt).
ObjectiveBreakdown evaluate_objective(const DispatchDecision& d, const ScenarioSet& set, const GridCase& c,
                                      int fuel_segments = 3);
inline double evaluate_objective_exact(const DispatchDecision& d, const ScenarioSet& set, const GridCase& c,
                                       int fuel_segments = 3) {
  return evaluate_objective(d, set, c, fuel_segments).exact();
}

DispatchDecision extract_decision(const SymbolicModel& m, const std::vector<double>& x);

}  // namespace jced
