#include "jcedkit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jcedkit/error.hpp"
#include "jcedkit/numfmt.hpp"

namespace jced {

double Trajectory::slope(std::size_t k) const {
  if (t.size() < 2) return 0.0;
  if (k == 0) return (df_hz[1] - df_hz[0]) / (t[1] - t[0]);
  if (k + 1 >= t.size()) return (df_hz[k] - df_hz[k - 1]) / (t[k] - t[k - 1]);
  return (df_hz[k + 1] - df_hz[k - 1]) / (t[k + 1] - t[k - 1]);
}

Trajectory simulate(const SfrAggregates& agg, const SimConfig& cfg, double f0) {
  if (!(cfg.step > 0.0)) throw ValidationError("simulate: step must be > 0");
  if (!(cfg.horizon > 0.0)) throw ValidationError("simulate: horizon must be > 0");
  const double H = agg.H_sys();
  if (!(H > 0.0)) throw NumericalError("simulate: total inertia is zero");
  const double D = agg.D_sys(), K = agg.R_G_inv, F = agg.F_H, T = agg.T_R;
  if (!(T > 0.0)) throw NumericalError("simulate: reheat time constant is zero");
  const double dp = cfg.dp_mw / agg.p_sys;

  auto rhs = [&](double x, double g, double& dx, double& dg) {
    const double pm = (1.0 - F) * g - F * K * x;
    dx = (pm - dp - D * x) / (2.0 * H);
    dg = (-g - K * x) / T;
  };

  const auto steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.step));
  Trajectory tr;
  tr.f0 = f0;
  tr.p_sys = agg.p_sys;
  tr.t.reserve(steps + 1);
  tr.df_hz.reserve(steps + 1);
  tr.gov.reserve(steps + 1);
  tr.dpm_mw.reserve(steps + 1);

  // Blow-up guard: the true response never exceeds the pure-inertia ramp
  // bound by orders of magnitude.
  const double limit = 1e6 * (std::abs(dp) + 1.0);
  double x = 0.0, g = 0.0;
  const double h = cfg.step;
  for (std::size_t k = 0; k <= steps; ++k) {
    tr.t.push_back(static_cast<double>(k) * h);
    tr.df_hz.push_back(x * f0);
    tr.gov.push_back(g);
    tr.dpm_mw.push_back(((1.0 - F) * g - F * K * x) * agg.p_sys);
    if (k == steps) break;
    double k1x, k1g, k2x, k2g, k3x, k3g, k4x, k4g;
    rhs(x, g, k1x, k1g);
    rhs(x + 0.5 * h * k1x, g + 0.5 * h * k1g, k2x, k2g);
    rhs(x + 0.5 * h * k2x, g + 0.5 * h * k2g, k3x, k3g);
    rhs(x + h * k3x, g + h * k3g, k4x, k4g);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    if (!std::isfinite(x) || !std::isfinite(g) || std::abs(x) > limit) {
      throw NumericalError("simulate: integration unstable, use a smaller step");
    }
  }
  return tr;
}

SimMetrics metrics(const Trajectory& traj) {
  SimMetrics m;
  if (traj.size() < 2) return m;
  m.rocof = (traj.df_hz[1] - traj.df_hz[0]) / (traj.t[1] - traj.t[0]);
  std::size_t peak = 0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (std::abs(traj.df_hz[k]) > std::abs(traj.df_hz[peak])) peak = k;
  }
  m.nadir = traj.df_hz[peak];
  m.nadir_time = traj.t[peak];
  const double cut = traj.t.front() + 0.9 * (traj.t.back() - traj.t.front());
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj.t[k] >= cut) {
      sum += traj.df_hz[k];
      ++cnt;
    }
  }
  m.ss_dev = cnt ? sum / static_cast<double>(cnt) : traj.df_hz.back();
  return m;
}

std::vector<double> device_response_mw(const Trajectory& traj, double H, double D, double base_mw) {
  std::vector<double> out(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double x = traj.df_hz[k] / traj.f0;
    const double xdot = traj.slope(k) / traj.f0;
    out[k] = -(2.0 * H * xdot + D * x) * base_mw;
  }
  return out;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,df_hz,dpm_mw,gov\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.t[k]) << ',' << format_double(traj.df_hz[k]) << ',' << format_double(traj.dpm_mw[k])
        << ',' << format_double(traj.gov[k]) << '\n';
  }
  return out.str();
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const DisturbanceCheck& c) { return c.passed(); });
}

VerifyReport verify_decision(const DispatchDecision& d, const GridCase& c, const std::vector<double>& disturbances_mw,
                             const SimConfig& base_cfg, double rel_tol) {
  d.check_dimensions(c);
  const auto& thr = c.thresholds;
  const auto agg = aggregate(c, InverterSettings::from(d));
  VerifyReport rep;
  rep.rocof_max = thr.rocof_max;
  rep.nadir_max = thr.nadir_max;
  rep.ss_max = thr.ss_max;
  const double slack = 1.0 + rel_tol;
  for (double dp : disturbances_mw) {
    DisturbanceCheck chk;
    chk.dp_mw = dp;
    if (dp == 0.0) {
      rep.checks.push_back(chk);
      continue;
    }
    SimConfig cfg = base_cfg;
    cfg.dp_mw = dp;
    const auto traj = simulate(agg, cfg, c.f0_hz);
    chk.m = metrics(traj);
    chk.rocof_ok = std::abs(chk.m.rocof) <= thr.rocof_max * slack;
    chk.nadir_ok = std::abs(chk.m.nadir) <= thr.nadir_max * slack;
    chk.ss_ok = std::abs(chk.m.ss_dev) <= thr.ss_max * slack;

    auto check_device = [&](const std::string& who, double H, double D, double base, double up_cap, double dn_cap) {
      if (!chk.headroom_ok) return;
      const auto resp = device_response_mw(traj, H, D, base);
      const double up = *std::max_element(resp.begin(), resp.end());
      const double dn = -*std::min_element(resp.begin(), resp.end());
      if (up > up_cap * slack + 1e-9) {
        chk.headroom_ok = false;
        chk.headroom_detail = who + " needs " + format_double(up) + " MW up, holds " + format_double(up_cap);
      } else if (dn > dn_cap * slack + 1e-9) {
        chk.headroom_ok = false;
        chk.headroom_detail = who + " needs " + format_double(dn) + " MW down, holds " + format_double(dn_cap);
      }
    };
    for (std::size_t w = 0; w < c.dibr.size(); ++w) {
      const double cap = c.dibr[w].capacity_mw;
      const double bound = pfr_headroom_bound(d.H_w[w], d.D_w[w], thr, c.f0_hz, cap);
      // DIBRs can always de-load, so only the upward direction is limited.
      check_device("dibr " + std::to_string(c.dibr[w].id), d.H_w[w], d.D_w[w], cap, bound, HUGE_VAL);
    }
    for (std::size_t e = 0; e < c.storage.size(); ++e) {
      check_device("storage " + std::to_string(c.storage[e].id), d.H_e[e], d.D_e[e], c.storage[e].p_max, d.r_e_up[e],
                   d.r_e_dn[e]);
    }
    rep.checks.push_back(chk);
  }
  return rep;
}

}  // namespace jced
