#include "jcedkit/sfr.hpp"

#include <cmath>
#include <limits>

#include "jcedkit/dynamics.hpp"
#include "jcedkit/error.hpp"

namespace jced {

SfrAggregates aggregate(const GridCase& c, const InverterSettings& s) {
  if (s.H_w.size() != c.dibr.size() || s.D_w.size() != c.dibr.size() || s.H_e.size() != c.storage.size() ||
      s.D_e.size() != c.storage.size()) {
    throw ValidationError("aggregate: inverter settings do not match the case");
  }
  SfrAggregates a;
  a.p_sys = c.p_sys();
  if (!(a.p_sys > 0.0)) throw ValidationError("aggregate: p_sys must be > 0");
  a.D_O = c.thresholds.damping;

  double gain_sum = 0.0;
  for (const auto& g : c.thermal) {
    a.H_G += g.inertia * g.p_max / a.p_sys;
    const double gain = g.p_max / g.droop / a.p_sys;
    a.R_G_inv += gain;
    a.lambda.push_back(gain);
    gain_sum += gain;
  }
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    a.lambda[g] = gain_sum > 0.0 ? a.lambda[g] / gain_sum : 1.0 / static_cast<double>(c.thermal.size());
    a.F_H += a.lambda[g] * c.thermal[g].hp_fraction;
    a.T_R += a.lambda[g] * c.thermal[g].reheat_time;
  }
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    if (s.H_w[w] < 0.0 || s.D_w[w] < 0.0) throw ValidationError("aggregate: negative DIBR inertia or droop");
    const double share = c.dibr[w].capacity_mw / a.p_sys;
    a.H_W += s.H_w[w] * share;
    a.D_W += s.D_w[w] * share;
  }
  for (std::size_t e = 0; e < c.storage.size(); ++e) {
    if (s.H_e[e] < 0.0 || s.D_e[e] < 0.0) throw ValidationError("aggregate: negative storage inertia or droop");
    const double share = c.storage[e].p_max / a.p_sys;
    a.H_E += s.H_e[e] * share;
    a.D_E += s.D_e[e] * share;
  }
  return a;
}

double rocof(double dp_mw, const SfrAggregates& agg, double f0) {
  const double h = agg.H_sys();
  if (!(h > 0.0)) throw NumericalError("rocof: total inertia is zero");
  return f0 * (-dp_mw / agg.p_sys) / (2.0 * h);
}

double steady_state_dev(double dp_mw, const SfrAggregates& agg, double f0) {
  const double d = agg.D_sys() + agg.R_G_inv;
  if (!(d > 0.0)) throw NumericalError("steady_state_dev: total damping is zero");
  return f0 * (-dp_mw / agg.p_sys) / d;
}

SfrClosedForm sfr_parameters(const SfrAggregates& agg) {
  const double H = agg.H_sys(), T = agg.T_R, D = agg.D_sys(), K = agg.R_G_inv, F = agg.F_H;
  if (!(H > 0.0)) throw NumericalError("nadir: total inertia is zero");
  if (!(T > 0.0)) throw NumericalError("nadir: reheat time constant is zero");
  if (!(D + K > 0.0)) throw NumericalError("nadir: total damping is zero");
  SfrClosedForm f;
  f.omega_n = std::sqrt((D + K) / (2.0 * H * T));
  f.zeta = (2.0 * H + D * T + K * F * T) / (2.0 * H * T) / (2.0 * f.omega_n);
  f.underdamped = f.zeta < 1.0;
  if (f.underdamped) {
    const double a = f.zeta * f.omega_n;
    const double wd = f.omega_n * std::sqrt(1.0 - f.zeta * f.zeta);
    f.t_max = (M_PI - std::atan2(T * wd, 1.0 - a * T)) / wd;
  }
  return f;
}

double step_response_hz(double t, double dp_mw, const SfrAggregates& agg, double f0) {
  const auto f = sfr_parameters(agg);
  if (!f.underdamped) throw NumericalError("step_response_hz: system is not underdamped");
  const double H = agg.H_sys(), T = agg.T_R;
  const double a = f.zeta * f.omega_n;
  const double wd = f.omega_n * std::sqrt(1.0 - f.zeta * f.zeta);
  const double e = std::exp(-a * t);
  const double s = std::sin(wd * t), co = std::cos(wd * t);
  const double step = (1.0 - e * (co + a / wd * s)) / (f.omega_n * f.omega_n);
  const double impulse = e * s / wd;
  return f0 * (-dp_mw / agg.p_sys) / (2.0 * H * T) * (step + T * impulse);
}

NadirResult nadir_closed_form(double dp_mw, const SfrAggregates& agg, double f0) {
  NadirResult r;
  r.form = sfr_parameters(agg);
  if (dp_mw == 0.0) return r;
  const double ss = steady_state_dev(dp_mw, agg, f0);
  if (r.form.underdamped) {
    const double peak = step_response_hz(r.form.t_max, dp_mw, agg, f0);
    r.deviation_hz = std::abs(peak) >= std::abs(ss) ? peak : ss;
    return r;
  }
  // Real poles r1 > r2: g(t) = 1/(r1 r2) + c1 e^{r1 t} + c2 e^{r2 t}.
  const double H = agg.H_sys(), T = agg.T_R;
  const double a = r.form.zeta * r.form.omega_n;
  const double root = r.form.omega_n * std::sqrt(r.form.zeta * r.form.zeta - 1.0);
  const double r1 = -a + root, r2 = -a - root;
  const double scale = f0 * (-dp_mw / agg.p_sys) / (2.0 * H * T);
  if (!(root > 1e-9 * a)) {
    // Critically damped: the closed form degenerates, scan the simulation.
    SimConfig cfg;
    cfg.dp_mw = dp_mw;
    const auto m = metrics(simulate(agg, cfg, f0));
    r.deviation_hz = m.nadir;
    r.form.t_max = m.nadir_time;
    return r;
  }
  const double c1 = (1.0 + r1 * T) / (r1 * (r1 - r2));
  const double c2 = (1.0 + r2 * T) / (r2 * (r2 - r1));
  r.deviation_hz = ss;
  r.form.t_max = std::numeric_limits<double>::infinity();
  const double ratio = (1.0 + r2 * T) / (1.0 + r1 * T);
  if (ratio > 0.0) {
    const double t = std::log(ratio) / (r1 - r2);
    if (t > 0.0) {
      const double peak = scale * (1.0 / (r1 * r2) + c1 * std::exp(r1 * t) + c2 * std::exp(r2 * t));
      if (std::abs(peak) > std::abs(ss)) {
        r.deviation_hz = peak;
        r.form.t_max = t;
      }
    }
  }
  return r;
}

double pfr_headroom_bound(double H, double D, const Thresholds& thr, double f0, double base_mw) {
  return (2.0 * H * thr.rocof_max + D * thr.nadir_max) / f0 * base_mw;
}

}  // namespace jced
