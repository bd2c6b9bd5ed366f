#pragma once

#include <string>
#include <vector>

#include "jcedkit/decision.hpp"
#include "jcedkit/grid.hpp"
#include "jcedkit/sfr.hpp"

namespace jced {

struct SimConfig {
  double horizon = 60.0;  // s
  double step = 1e-3;     // s
  double dp_mw = 0.0;     // step disturbance at t = 0, > 0 is a net load increase
};

struct Trajectory {
  std::vector<double> t;       // s
  std::vector<double> df_hz;   // frequency deviation
  std::vector<double> gov;     // governor lag state, p.u.
  std::vector<double> dpm_mw;  // mechanical power change of the equivalent unit
  double f0 = 60.0;
  double p_sys = 0.0;

  std::size_t size() const { return t.size(); }
  // d(delta f)/dt in Hz/s at sample k (one-sided at the ends).
  double slope(std::size_t k) const;
};

// Fixed-step RK4 integration of
//   2 H_sys dx/dt = dPm - dP - D_sys x,  T_R dg/dt = -g - x / R_G,
//   dPm = (1 - F_H) g - F_H x / R_G,
// with x = delta f / f0 and powers in p.u. of p_sys.
Trajectory simulate(const SfrAggregates& agg, const SimConfig& cfg, double f0);

struct SimMetrics {
  double rocof = 0.0;     // Hz/s, from the first step
  double nadir = 0.0;     // Hz, signed global extremum
  double nadir_time = 0.0;
  double ss_dev = 0.0;    // Hz, mean of the final 10% of the horizon
};

SimMetrics metrics(const Trajectory& traj);

// Per-device output change (MW) along a trajectory: -(2H dx/dt + D x) base.
std::vector<double> device_response_mw(const Trajectory& traj, double H, double D, double base_mw);

std::string trajectory_to_csv(const Trajectory& traj);

struct DisturbanceCheck {
  double dp_mw = 0.0;
  SimMetrics m;
  bool rocof_ok = true;
  bool nadir_ok = true;
  bool ss_ok = true;
  bool headroom_ok = true;
  std::string headroom_detail;  // first failing device, if any

  bool passed() const { return rocof_ok && nadir_ok && ss_ok && headroom_ok; }
};

struct VerifyReport {
  std::vector<DisturbanceCheck> checks;
  double rocof_max = 0.0, nadir_max = 0.0, ss_max = 0.0;  // thresholds, Hz/s and Hz

  bool passed() const;
};

// Simulates each disturbance with the decision's inverter settings. A check
// fails when an index exceeds its threshold by more than rel_tol relative.
VerifyReport verify_decision(const DispatchDecision& d, const GridCase& c, const std::vector<double>& disturbances_mw,
                             const SimConfig& base_cfg = {}, double rel_tol = 1e-3);

}  // namespace jced
