#include "jcedkit/builder.hpp"

#include <algorithm>
#include <cmath>

#include "jcedkit/error.hpp"
#include "jcedkit/sfr.hpp"

namespace jced {

namespace {

std::string id(const char* prefix, int v) { return prefix + std::to_string(v); }

void check_fixed(const GridCase& c, const InverterSettings& s) {
  if (s.H_w.size() != c.dibr.size() || s.D_w.size() != c.dibr.size() || s.H_e.size() != c.storage.size() ||
      s.D_e.size() != c.storage.size()) {
    throw ValidationError("fix-jced: fixed inverter settings do not match the case");
  }
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    if (s.H_w[w] < 0.0 || s.H_w[w] > c.dibr[w].h_max || s.D_w[w] < 0.0 || s.D_w[w] > c.dibr[w].d_max) {
      throw ValidationError("fix-jced: fixed H/D of dibr " + std::to_string(c.dibr[w].id) + " outside device limits");
    }
  }
  for (std::size_t e = 0; e < c.storage.size(); ++e) {
    if (s.H_e[e] < 0.0 || s.H_e[e] > c.storage[e].h_max || s.D_e[e] < 0.0 || s.D_e[e] > c.storage[e].d_max) {
      throw ValidationError("fix-jced: fixed H/D of storage " + std::to_string(c.storage[e].id) +
                            " outside device limits");
    }
  }
}

// Breakpoints of the piecewise-linear fuel curve over [p_min, p_max].
std::vector<double> fuel_breaks(const ThermalUnit& g, int segments) {
  std::vector<double> b;
  if (!(g.p_max > g.p_min)) return {g.p_min};
  for (int s = 0; s <= segments; ++s) b.push_back(g.p_min + (g.p_max - g.p_min) * s / segments);
  return b;
}

// PFR headroom coefficients per unit of H and D for a device of rating base.
double pfr_h_coef(const Thresholds& t, double f0, double base) { return 2.0 * t.rocof_max / f0 * base; }
double pfr_d_coef(const Thresholds& t, double f0, double base) { return t.nadir_max / f0 * base; }

}  // namespace

double fuel_cost_pwl(const ThermalUnit& g, double p, int segments) {
  const auto b = fuel_breaks(g, segments);
  if (b.size() == 1) return g.cost(b[0]);
  if (p <= b.front()) return g.cost(b.front());
  for (std::size_t s = 1; s < b.size(); ++s) {
    if (p <= b[s] || s + 1 == b.size()) {
      const double t = (p - b[s - 1]) / (b[s] - b[s - 1]);
      return g.cost(b[s - 1]) + t * (g.cost(b[s]) - g.cost(b[s - 1]));
    }
  }
  return g.cost(b.back());
}

void add_variables(SymbolicModel& m, const GridCase& c, const BuildMode& mode, int fuel_segments) {
  if (fuel_segments < 1) throw ValidationError("fuel_segments must be >= 1");
  auto& p = m.det;
  auto& v = m.vars;
  const double dt_min = c.thresholds.dt_h * 60.0;
  m.mode = mode;
  m.fuel_segments = fuel_segments;
  if (mode.kind == ModeKind::FixJced) check_fixed(c, mode.fixed);

  for (const auto& g : c.thermal) {
    v.p_g.push_back(p.add_var(id("p_g", g.id), g.p_min, g.p_max));
    v.r_up.push_back(p.add_var(id("r_up_g", g.id), 0.0, g.ramp_up * dt_min));
    v.r_dn.push_back(p.add_var(id("r_dn_g", g.id), 0.0, g.ramp_dn * dt_min));
    v.alpha.push_back(p.add_var(id("alpha_g", g.id), 0.0, g.is_agc ? 1.0 : 0.0));
    const auto b = fuel_breaks(g, fuel_segments);
    std::vector<int> segs;
    for (std::size_t s = 1; s < b.size(); ++s) {
      segs.push_back(p.add_var("pseg_g" + std::to_string(g.id) + "_" + std::to_string(s), 0.0, b[s] - b[s - 1]));
    }
    v.fuel_seg.push_back(std::move(segs));
  }
  const bool fixed = mode.kind == ModeKind::FixJced;
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    const auto& d = c.dibr[w];
    v.p_w.push_back(p.add_var(id("p_w", d.id), 0.0, d.forecast_mw));
    const double h = fixed ? mode.fixed.H_w[w] : 0.0, dd = fixed ? mode.fixed.D_w[w] : 0.0;
    v.H_w.push_back(p.add_var(id("H_w", d.id), h, fixed ? h : d.h_max));
    v.D_w.push_back(p.add_var(id("D_w", d.id), dd, fixed ? dd : d.d_max));
  }
  for (std::size_t e = 0; e < c.storage.size(); ++e) {
    const auto& s = c.storage[e];
    v.p_e.push_back(p.add_var(id("p_e", s.id), -s.p_max, s.p_max));
    v.r_e_up.push_back(p.add_var(id("r_e_up", s.id), 0.0, kInf));
    v.r_e_dn.push_back(p.add_var(id("r_e_dn", s.id), 0.0, kInf));
    v.p_loss.push_back(p.add_var(id("p_loss", s.id), 0.0, kInf));
    const double h = fixed ? mode.fixed.H_e[e] : 0.0, dd = fixed ? mode.fixed.D_e[e] : 0.0;
    v.H_e.push_back(p.add_var(id("H_e", s.id), h, fixed ? h : s.h_max));
    v.D_e.push_back(p.add_var(id("D_e", s.id), dd, fixed ? dd : s.d_max));
  }
}

void build_objective(SymbolicModel& m, const GridCase& c, const ScenarioSet& set) {
  auto& p = m.det;
  const auto& v = m.vars;
  const double dt = c.thresholds.dt_h;

  double e_abs = 0.0;
  std::vector<double> e_pbar(c.dibr.size(), 0.0);
  for (const auto& s : set.scenarios) {
    e_abs += s.prob * std::abs(s.dp_load);
    for (std::size_t w = 0; w < c.dibr.size(); ++w) e_pbar[w] += s.prob * s.pbar[w];
  }
  m.expected_abs_dp = e_abs;

  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    const auto& u = c.thermal[g];
    const auto b = fuel_breaks(u, m.fuel_segments);
    p.obj_offset += dt * u.cost(b.front());
    for (std::size_t s = 1; s < b.size(); ++s) {
      const double slope = (u.cost(b[s]) - u.cost(b[s - 1])) / (b[s] - b[s - 1]);
      p.obj[v.fuel_seg[g][s - 1]] = dt * slope;
    }
    p.obj[v.r_up[g]] = dt * u.c_up;
    p.obj[v.r_dn[g]] = dt * u.c_dn;
    p.obj[v.alpha[g]] = dt * u.c_redispatch * e_abs;
  }
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    const double cw = c.dibr[w].curtail_price;
    p.obj_offset += dt * cw * e_pbar[w];
    p.obj[v.p_w[w]] = -dt * cw;
  }
  for (std::size_t e = 0; e < c.storage.size(); ++e) {
    const auto& s = c.storage[e];
    p.obj[v.p_loss[e]] = dt * s.c_loss;
    p.obj[v.r_e_up[e]] = dt * s.c_up;
    p.obj[v.r_e_dn[e]] = dt * s.c_dn;
  }
}

void build_deterministic(SymbolicModel& m, const GridCase& c, const BuildMode& mode) {
  auto& p = m.det;
  const auto& v = m.vars;
  const auto& t = c.thresholds;
  const double f0 = c.f0_hz;

  Terms bal;
  for (int j : v.p_g) bal.emplace_back(j, 1.0);
  for (int j : v.p_w) bal.emplace_back(j, 1.0);
  for (int j : v.p_e) bal.emplace_back(j, 1.0);
  p.add_row("balance", Sense::Eq, c.net_load(), bal, "balance");

  double pmin_sum = 0.0, cap_sum = 0.0;
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    const auto& u = c.thermal[g];
    const auto sid = std::to_string(u.id);
    pmin_sum += u.p_min;
    cap_sum += u.p_max;
    p.add_row("cap_up_g" + sid, Sense::Le, u.p_max, {{v.p_g[g], 1.0}, {v.r_up[g], 1.0}}, "gen_cap");
    p.add_row("cap_dn_g" + sid, Sense::Ge, u.p_min, {{v.p_g[g], 1.0}, {v.r_dn[g], -1.0}}, "gen_cap");
    Terms link{{v.p_g[g], 1.0}};
    for (int s : v.fuel_seg[g]) link.emplace_back(s, -1.0);
    p.add_row("fuel_g" + sid, Sense::Eq, u.p_min, link, "fuel");
    const double pfr = t.ss_max / f0 / u.droop * u.p_max;
    p.add_row("pfr_up_g" + sid, Sense::Ge, pfr, {{v.r_up[g], 1.0}}, "gen_pfr");
    p.add_row("pfr_dn_g" + sid, Sense::Ge, pfr, {{v.r_dn[g], 1.0}}, "gen_pfr");
  }
  for (const auto& w : c.dibr) cap_sum += w.forecast_mw;

  for (std::size_t e = 0; e < c.storage.size(); ++e) {
    const auto& s = c.storage[e];
    const auto sid = std::to_string(s.id);
    cap_sum += s.p_max;
    p.add_row("es_up_e" + sid, Sense::Le, s.p_max, {{v.p_e[e], 1.0}, {v.r_e_up[e], 1.0}}, "es_cap");
    p.add_row("es_dn_e" + sid, Sense::Ge, -s.p_max, {{v.p_e[e], 1.0}, {v.r_e_dn[e], -1.0}}, "es_cap");
    p.add_row("soc_lo_e" + sid, Sense::Le, s.e0 - s.e_low, {{v.p_e[e], t.dt_h}, {v.p_loss[e], t.dt_h}}, "es_soc");
    p.add_row("soc_hi_e" + sid, Sense::Ge, s.e0 - s.e_high, {{v.p_e[e], t.dt_h}, {v.p_loss[e], t.dt_h}}, "es_soc");
    p.add_row("loss_dis_e" + sid, Sense::Ge, 0.0, {{v.p_loss[e], 1.0}, {v.p_e[e], -(1.0 / s.eta_dis - 1.0)}},
              "es_loss");
    p.add_row("loss_ch_e" + sid, Sense::Ge, 0.0, {{v.p_loss[e], 1.0}, {v.p_e[e], -(s.eta_ch - 1.0)}}, "es_loss");
    const double kh = pfr_h_coef(t, f0, s.p_max), kd = pfr_d_coef(t, f0, s.p_max);
    p.add_row("es_pfr_up_e" + sid, Sense::Ge, 0.0, {{v.r_e_up[e], 1.0}, {v.H_e[e], -kh}, {v.D_e[e], -kd}}, "es_pfr");
    if (mode.kind != ModeKind::UpIced) {
      p.add_row("es_pfr_dn_e" + sid, Sense::Ge, 0.0, {{v.r_e_dn[e], 1.0}, {v.H_e[e], -kh}, {v.D_e[e], -kd}},
                "es_pfr");
    }
  }

  Terms agc;
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    if (c.thermal[g].is_agc) agc.emplace_back(v.alpha[g], 1.0);
  }
  if (agc.empty()) {
    m.warnings.push_back("no AGC unit: the participation-factor row sum(alpha) = 1 is infeasible");
  }
  p.add_row("agc_sum", Sense::Eq, 1.0, agc, "agc");

  if (pmin_sum > c.net_load()) {
    m.warnings.push_back("sum of thermal p_min exceeds the forecast net load");
  }
  if (cap_sum < c.net_load()) {
    m.warnings.push_back("total dispatchable capacity is below the forecast net load");
  }
}

void build_sfr_quantile(SymbolicModel& m, const GridCase& c, const ScenarioSet& set, const BuildMode& mode) {
  auto& p = m.det;
  const auto& v = m.vars;
  m.quantiles = disturbance_quantiles(set, c.thresholds);
  const double up = m.quantiles.dp_up_qR, dn = m.quantiles.dp_dn_qR;
  const bool down = mode.kind != ModeKind::UpIced;
  Terms sum_up, sum_dn;
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    if (!c.thermal[g].is_agc) continue;
    sum_up.emplace_back(v.r_up[g], 1.0);
    sum_dn.emplace_back(v.r_dn[g], 1.0);
  }
  p.add_row("sfr_total_up", Sense::Ge, up, sum_up, "sfr");
  if (down) p.add_row("sfr_total_dn", Sense::Ge, -dn, sum_dn, "sfr");
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    if (!c.thermal[g].is_agc) continue;
    const auto sid = std::to_string(c.thermal[g].id);
    p.add_row("sfr_up_g" + sid, Sense::Ge, 0.0, {{v.r_up[g], 1.0}, {v.alpha[g], -up}}, "sfr");
    if (down) p.add_row("sfr_dn_g" + sid, Sense::Ge, 0.0, {{v.r_dn[g], 1.0}, {v.alpha[g], dn}}, "sfr");
  }
}

void build_chance_blocks(SymbolicModel& m, const GridCase& c, const ScenarioSet& set, const PtdfMatrix& ptdf,
                         const PwlBoundary* boundary, const BuildMode& mode) {
  const auto& v = m.vars;
  const auto& t = c.thresholds;
  const double f0 = c.f0_hz;
  const double ps = c.p_sys();
  const std::size_t n = set.size();
  const bool icc = mode.kind == ModeKind::UpIced;

  auto push = [&](ChanceBlock blk) {
    if (blk.rows.empty()) return;
    if (!icc) {
      m.blocks.push_back(std::move(blk));
      return;
    }
    // Individual chance constraints: every row gets its own indicators.
    for (auto& row : blk.rows) {
      ChanceBlock single;
      single.kind = blk.kind;
      single.family = blk.family + "_" + row.name;
      single.delta = blk.delta;
      single.rows.push_back(std::move(row));
      m.blocks.push_back(std::move(single));
    }
  };

  Terms h_inv, d_inv;
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    h_inv.emplace_back(v.H_w[w], c.dibr[w].capacity_mw / ps);
    d_inv.emplace_back(v.D_w[w], c.dibr[w].capacity_mw / ps);
  }
  for (std::size_t e = 0; e < c.storage.size(); ++e) {
    h_inv.emplace_back(v.H_e[e], c.storage[e].p_max / ps);
    d_inv.emplace_back(v.D_e[e], c.storage[e].p_max / ps);
  }

  if (mode.kind == ModeKind::FixJced) {
    m.warnings.push_back(
        "fix-jced: frequency rows (RoCoF, nadir, steady state) contain no decision variables and are not built");
  } else {
    const auto agg = thermal_aggregate(c);
    ChanceBlock freq;
    freq.kind = ChanceKind::Freq;
    freq.family = "sys";
    freq.delta = t.delta_f;
    ChanceRow rate{"freq_rate", h_inv, std::vector<double>(n)};
    ChanceRow ss{"freq_ss", d_inv, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(set.scenarios[i].dp_load);
      rate.rhs[i] = a * f0 / (2.0 * ps * t.rocof_max) - agg.H_G;
      ss.rhs[i] = a * f0 / (ps * t.ss_max) - agg.D_O - agg.R_G_inv;
    }
    freq.rows.push_back(std::move(rate));
    freq.rows.push_back(std::move(ss));
    push(std::move(freq));

    if (!boundary) throw ValidationError("build_chance_blocks: nadir boundary is required");
    m.boundary = *boundary;
    for (std::size_t k = 0; k < boundary->pieces.size(); ++k) {
      const auto& pc = boundary->pieces[k];
      Terms row = h_inv;
      for (const auto& [j, a] : d_inv) row.emplace_back(j, pc.beta * a);
      m.det.add_row("nadir_" + std::to_string(k + 1), Sense::Ge, pc.alpha, row, "nadir");
    }
    if (boundary->d_lo > 0.0) {
      m.det.add_row("nadir_dmin", Sense::Ge, boundary->d_lo, d_inv, "nadir");
    }
  }

  ChanceBlock dibr;
  dibr.kind = ChanceKind::DibrUp;
  dibr.family = "W";
  dibr.delta = t.delta_dibr;
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    const double cap = c.dibr[w].capacity_mw;
    ChanceRow row{"dibr_up_w" + std::to_string(c.dibr[w].id),
                  {{v.p_w[w], -1.0}, {v.H_w[w], -pfr_h_coef(t, f0, cap)}, {v.D_w[w], -pfr_d_coef(t, f0, cap)}},
                  std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) row.rhs[i] = -set.scenarios[i].pbar[w];
    dibr.rows.push_back(std::move(row));
  }
  push(std::move(dibr));

  ChanceBlock line;
  line.kind = ChanceKind::LineFlow;
  line.family = "L";
  line.delta = t.delta_line;
  const auto nb = c.buses.size();
  // Net forecast withdrawal per scenario and bus.
  std::vector<std::vector<double>> withdrawal(n, std::vector<double>(nb));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = set.scenarios[i];
    for (std::size_t b = 0; b < nb; ++b) {
      withdrawal[i][b] = (c.buses[b].load_mw + s.zeta_d[b]) - (c.buses[b].ibr_mw + s.zeta_h[b]);
    }
  }
  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    const double F = c.lines[l].capacity_mw;
    auto sf = [&](int bus) { return ptdf(l, c.bus_index(bus)); };
    Terms base;
    for (std::size_t g = 0; g < c.thermal.size(); ++g) base.emplace_back(v.p_g[g], sf(c.thermal[g].bus));
    for (std::size_t w = 0; w < c.dibr.size(); ++w) base.emplace_back(v.p_w[w], sf(c.dibr[w].bus));
    for (std::size_t e = 0; e < c.storage.size(); ++e) base.emplace_back(v.p_e[e], sf(c.storage[e].bus));
    std::vector<double> e_l(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t b = 0; b < nb; ++b) s += ptdf(l, b) * withdrawal[i][b];
      e_l[i] = s;
    }
    const auto sid = "line" + std::to_string(c.lines[l].id);
    for (int dir = 0; dir < 2; ++dir) {
      Terms a = base;
      for (std::size_t g = 0; g < c.thermal.size(); ++g) {
        if (!c.thermal[g].is_agc) continue;
        const double s = sf(c.thermal[g].bus);
        a.emplace_back(dir == 0 ? v.r_up[g] : v.r_dn[g], dir == 0 ? s : -s);
      }
      std::erase_if(a, [](const auto& tm) { return std::abs(tm.second) < 1e-12; });
      Terms neg = a;
      for (auto& tm : neg) tm.second = -tm.second;
      const std::string tag = dir == 0 ? "_up" : "_dn";
      ChanceRow low{sid + tag + "_low", a, std::vector<double>(n)};
      ChanceRow up{sid + tag + "_up", neg, std::vector<double>(n)};
      for (std::size_t i = 0; i < n; ++i) {
        low.rhs[i] = -F + e_l[i];
        up.rhs[i] = -F - e_l[i];
      }
      const int li = static_cast<int>(line.rows.size());
      line.rows.push_back(std::move(low));
      line.rows.push_back(std::move(up));
      line.pairs.push_back({li, li + 1, F});
    }
  }
  push(std::move(line));
}

SymbolicModel build_model(const GridCase& c, const ScenarioSet& set, const PtdfMatrix& ptdf, const BuildMode& mode,
                          const BuildOptions& opts) {
  set.validate(c);
  SymbolicModel m;
  add_variables(m, c, mode, opts.fuel_segments);
  build_objective(m, c, set);
  build_deterministic(m, c, mode);
  build_sfr_quantile(m, c, set, mode);
  PwlBoundary boundary;
  const PwlBoundary* bp = nullptr;
  if (mode.kind != ModeKind::FixJced) {
    try {
      boundary = fit_nadir_boundary(c, m.quantiles.abs_dp_qF, opts.nadir_pieces, opts.boundary);
    } catch (const ValidationError& e) {
      throw InfeasibleError("freq", std::string("nadir boundary: ") + e.what());
    }
    bp = &boundary;
  }
  build_chance_blocks(m, c, set, ptdf, bp, mode);
  m.det.assemble();
  return m;
}

SymbolicModel build_model(const GridCase& c, const ScenarioSet& set, const BuildMode& mode,
                          const BuildOptions& opts) {
  return build_model(c, set, compute_ptdf(c), mode, opts);
}

ObjectiveBreakdown evaluate_objective(const DispatchDecision& d, const ScenarioSet& set, const GridCase& c,
                                      int fuel_segments) {
  d.check_dimensions(c);
  const double dt = c.thresholds.dt_h;
  ObjectiveBreakdown o;
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    const auto& u = c.thermal[g];
    o.fuel += dt * fuel_cost_pwl(u, d.p_g[g], fuel_segments);
    o.fuel_quadratic += dt * u.cost(d.p_g[g]);
    o.reserve += dt * (u.c_up * d.r_up[g] + u.c_dn * d.r_dn[g]);
  }
  for (std::size_t e = 0; e < c.storage.size(); ++e) {
    const auto& s = c.storage[e];
    o.storage += dt * (s.c_loss * d.p_loss[e] + s.c_up * d.r_e_up[e] + s.c_dn * d.r_e_dn[e]);
  }
  for (const auto& s : set.scenarios) {
    for (std::size_t w = 0; w < c.dibr.size(); ++w) {
      o.curtailment += s.prob * dt * c.dibr[w].curtail_price * (s.pbar[w] - d.p_w[w]);
    }
    for (std::size_t g = 0; g < c.thermal.size(); ++g) {
      const double x = d.alpha[g] * s.dp_load;
      const double cr = c.thermal[g].c_redispatch;
      o.redispatch_c1 += s.prob * dt * cr * std::abs(x);
      const double plus = std::max(x, 0.0), minus = std::max(-x, 0.0);
      o.redispatch_exact += s.prob * dt * cr * (std::min(plus, d.r_up[g]) + std::min(minus, d.r_dn[g]));
    }
  }
  return o;
}

DispatchDecision extract_decision(const SymbolicModel& m, const std::vector<double>& x) {
  const auto& v = m.vars;
  auto take = [&](const std::vector<int>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (int j : idx) out.push_back(x.at(j));
    return out;
  };
  DispatchDecision d;
  d.p_g = take(v.p_g);
  d.r_up = take(v.r_up);
  d.r_dn = take(v.r_dn);
  d.alpha = take(v.alpha);
  d.p_w = take(v.p_w);
  d.H_w = take(v.H_w);
  d.D_w = take(v.D_w);
  d.p_e = take(v.p_e);
  d.r_e_up = take(v.r_e_up);
  d.r_e_dn = take(v.r_e_dn);
  d.p_loss = take(v.p_loss);
  d.H_e = take(v.H_e);
  d.D_e = take(v.D_e);
  return d;
}

}  // namespace jced
