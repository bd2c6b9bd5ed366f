#pragma once

#include <vector>

#include "jcedkit/decision.hpp"
#include "jcedkit/grid.hpp"

namespace jced {

// Equivalent single-machine parameters. Inertias in s and damping/droop gains
// in p.u., all on the system base p_sys.
struct SfrAggregates {
  double H_G = 0.0;
  double H_W = 0.0;
  double H_E = 0.0;
  double D_W = 0.0;
  double D_E = 0.0;
  double R_G_inv = 0.0;
  double F_H = 0.0;
  double T_R = 0.0;
  double D_O = 0.0;
  double p_sys = 0.0;  // MW
  std::vector<double> lambda;

  double H_sys() const { return H_G + H_W + H_E; }
  double D_sys() const { return D_O + D_W + D_E; }
  double H_inv() const { return H_W + H_E; }  // H^I
  double D_inv() const { return D_W + D_E; }  // D^I
};

SfrAggregates aggregate(const GridCase& c, const InverterSettings& s);

// Thermal-only part (inverter terms zero); the base for boundary fitting.
inline SfrAggregates thermal_aggregate(const GridCase& c) { return aggregate(c, InverterSettings::zeros(c)); }

// Signed indices for a step disturbance dp_mw (> 0 means net load increase).
double rocof(double dp_mw, const SfrAggregates& agg, double f0);
double steady_state_dev(double dp_mw, const SfrAggregates& agg, double f0);

struct SfrClosedForm {
  double zeta = 0.0;
  double omega_n = 0.0;  // rad/s
  double t_max = 0.0;    // s
  bool underdamped = true;
};

struct NadirResult {
  double deviation_hz = 0.0;  // signed extremum of delta f
  SfrClosedForm form;
};

// Extremum of the reheat-governor second-order response. Underdamped systems
// use the analytic peak, overdamped ones the real-pole form; t_max is
// infinite when the response approaches steady state monotonically.
NadirResult nadir_closed_form(double dp_mw, const SfrAggregates& agg, double f0);

SfrClosedForm sfr_parameters(const SfrAggregates& agg);

// Analytic delta f (Hz) at time t of the step response; underdamped only.
double step_response_hz(double t, double dp_mw, const SfrAggregates& agg, double f0);

// Reserve (MW) a device must hold for its inertia H (s) and droop D (p.u.)
// when RoCoF and deviation sit at their thresholds.
double pfr_headroom_bound(double H, double D, const Thresholds& thr, double f0, double base_mw);

}  // namespace jced
