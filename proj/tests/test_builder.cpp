#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "jcedkit/builder.hpp"
#include "jcedkit/error.hpp"
#include "jcedkit/model_io.hpp"
#include "jcedkit/pipeline.hpp"
#include "jcedkit/reform.hpp"
#include "jcedkit/solver.hpp"
#include "test_support.hpp"

using namespace jced;

namespace {

const Row& row_named(const CanonicalProgram& p, const std::string& name) {
  for (const auto& r : p.rows) {
    if (r.name == name) return r;
  }
  FAIL("row not found: " << name);
  return p.rows.front();
}

double coef(const CanonicalProgram& p, const std::string& row, const std::string& var) {
  int r = -1;
  for (int i = 0; i < p.num_rows(); ++i) {
    if (p.rows[i].name == row) r = i;
  }
  const int c = p.var_index(var);
  for (const auto& t : p.triplets) {
    if (t.row == r && t.col == c) return t.val;
  }
  return 0.0;
}

// Scenario set with given aggregate disturbances placed on bus index `bus`.
ScenarioSet from_disturbances(const GridCase& c, const std::vector<double>& dps, std::size_t bus = 1) {
  ScenarioSet s;
  for (double dp : dps) {
    Scenario sc;
    sc.index = s.size();
    sc.prob = 1.0 / static_cast<double>(dps.size());
    sc.zeta_d.assign(c.buses.size(), 0.0);
    sc.zeta_h.assign(c.buses.size(), 0.0);
    sc.zeta_d[bus] = dp;
    sc.dp_load = disturbance_of(sc.zeta_d, sc.zeta_h);
    for (const auto& w : c.dibr) sc.pbar.push_back(w.forecast_mw);
    s.scenarios.push_back(sc);
  }
  return s;
}

struct Counts {
  int vars = 0;
  int det_rows = 0;
  int chance_rows = 0;
};

// Closed-form sizes of the built model, as documented in docs/model_counts.md.
Counts expected_counts(const GridCase& c, ModeKind mode, int S, int M, bool nadir_dmin) {
  const int Ng = static_cast<int>(c.thermal.size()), Nw = static_cast<int>(c.dibr.size());
  const int Ne = static_cast<int>(c.storage.size()), Nl = static_cast<int>(c.lines.size());
  int Nagc = 0;
  for (const auto& g : c.thermal) Nagc += g.is_agc ? 1 : 0;
  Counts k;
  k.vars = Ng * (4 + S) + 3 * Nw + 6 * Ne;
  const bool up = mode == ModeKind::UpIced, fix = mode == ModeKind::FixJced;
  k.det_rows = 1 + 5 * Ng + (up ? 7 : 8) * Ne + 1 + (up ? 1 + Nagc : 2 + 2 * Nagc);
  if (!fix) k.det_rows += M + (nadir_dmin ? 1 : 0);
  k.chance_rows = (fix ? 0 : 2) + Nw + 4 * Nl;
  return k;
}

}  // namespace

TEST_SUITE("builder") {

TEST_CASE("every decision variable appears once with its bounds") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 20, 1);
  const auto m = build_model(c, set, BuildMode::po());
  const auto& p = m.det;
  auto count = [&](const std::string& name) {
    return std::count_if(p.vars.begin(), p.vars.end(), [&](const Variable& v) { return v.name == name; });
  };
  for (const auto& g : c.thermal) {
    const auto s = std::to_string(g.id);
    for (const auto& n : {"p_g" + s, "r_up_g" + s, "r_dn_g" + s, "alpha_g" + s}) CHECK(count(n) == 1);
    const auto& v = p.vars[p.var_index("p_g" + s)];
    CHECK(v.lb == g.p_min);
    CHECK(v.ub == g.p_max);
    CHECK(p.vars[p.var_index("alpha_g" + s)].ub == (g.is_agc ? 1.0 : 0.0));
    CHECK(p.vars[p.var_index("r_up_g" + s)].ub == doctest::Approx(g.ramp_up * 15.0));
  }
  for (const auto& w : c.dibr) {
    const auto s = std::to_string(w.id);
    for (const auto& n : {"p_w" + s, "H_w" + s, "D_w" + s}) CHECK(count(n) == 1);
    CHECK(p.vars[p.var_index("H_w" + s)].ub == w.h_max);
    CHECK(p.vars[p.var_index("D_w" + s)].ub == w.d_max);
    CHECK(p.vars[p.var_index("p_w" + s)].ub == w.forecast_mw);
  }
  for (const auto& e : c.storage) {
    const auto s = std::to_string(e.id);
    for (const auto& n : {"p_e" + s, "r_e_up" + s, "r_e_dn" + s, "p_loss" + s, "H_e" + s, "D_e" + s}) {
      CHECK(count(n) == 1);
    }
    CHECK(p.vars[p.var_index("p_e" + s)].lb == -e.p_max);
    CHECK(p.vars[p.var_index("H_e" + s)].ub == e.h_max);
  }
  CHECK(row_named(p, "agc_sum").rhs == 1.0);
}

TEST_CASE("storage loss rows") {
  const auto c = jtest::six_bus();
  const auto set = forecast_scenarios(c, 1);
  const auto m = build_model(c, set, BuildMode::po());
  // p_loss - (1/eta_dis - 1) p_e >= 0 and p_loss - (eta_ch - 1) p_e >= 0.
  const double kd = -coef(m.det, "loss_dis_e1", "p_e1");
  const double kc = -coef(m.det, "loss_ch_e1", "p_e1");
  CHECK(kd * 10.0 == doctest::Approx(0.526).epsilon(1e-3));
  CHECK(kc * -10.0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(coef(m.det, "loss_dis_e1", "p_loss1") == 1.0);
}

TEST_CASE("thermal PFR row uses the unit base") {
  const auto c = jtest::six_bus();
  const auto m = build_model(c, forecast_scenarios(c, 1), BuildMode::po());
  const auto& g = c.thermal[0];
  CHECK(g.droop == 0.05);
  CHECK(row_named(m.det, "pfr_up_g1").rhs == doctest::Approx((0.25 / 60.0) / 0.05 * g.p_max).epsilon(1e-12));
  CHECK(row_named(m.det, "pfr_dn_g1").rhs == row_named(m.det, "pfr_up_g1").rhs);
}

TEST_CASE("SFR quantile rows") {
  auto c = jtest::two_unit_toy();
  c.thermal[1].bus = 1;
  // dp in {-50..50}: upper delta_R/2 quantile is 50 when delta_R is 0.
  c.thresholds.delta_r = 0.0;
  const auto set = from_disturbances(c, {-50.0, -10.0, 0.0, 10.0, 50.0});
  SymbolicModel m;
  add_variables(m, c, BuildMode::po(), 3);
  build_sfr_quantile(m, c, set, BuildMode::po());
  CHECK(m.quantiles.dp_up_qR == 50.0);
  CHECK(row_named(m.det, "sfr_total_up").rhs == 50.0);
  CHECK(coef(m.det, "sfr_total_up", "r_up_g1") == 1.0);
  CHECK(coef(m.det, "sfr_total_up", "r_up_g2") == 1.0);
  CHECK(coef(m.det, "sfr_up_g1", "alpha_g1") == -50.0);
  CHECK(coef(m.det, "sfr_up_g2", "alpha_g2") == -50.0);
  // Symmetric data: the down requirement equals the up requirement.
  CHECK(row_named(m.det, "sfr_total_dn").rhs == 50.0);

  c.thresholds.delta_r = 1.0;
  SymbolicModel m1;
  add_variables(m1, c, BuildMode::po(), 3);
  build_sfr_quantile(m1, c, set, BuildMode::po());
  CHECK(m1.det.num_rows() == 6);
}

TEST_CASE("redispatch term and exact objective") {
  auto c = jtest::chain(2);
  auto g = jtest::unit(1, 1, 0.0, 200.0, 20.0);
  c.thermal = {g};
  c.buses[1].load_mw = 50.0;
  const auto set = from_disturbances(c, {-10.0, 10.0});
  auto d = DispatchDecision::zeros(c);
  d.p_g = {50.0};
  d.alpha = {1.0};
  d.r_up = {20.0};
  d.r_dn = {20.0};
  const auto o = evaluate_objective(d, set, c);
  // E|dp| = 10 MW at c_r = 1.2 c_base.
  CHECK(o.redispatch_c1 / c.thresholds.dt_h == doctest::Approx(12.0 * 20.0).epsilon(1e-12));
  CHECK(o.exact() == doctest::Approx(o.approx()).epsilon(1e-15));

  // alpha dp = 2 r_up in the only scenario: the cap binds.
  const auto one = from_disturbances(c, {40.0});
  const auto o2 = evaluate_objective(d, one, c);
  CHECK(o2.redispatch_exact / c.thresholds.dt_h == doctest::Approx(1.2 * 20.0 * 20.0).epsilon(1e-12));
  CHECK(o2.redispatch_c1 == doctest::Approx(2.0 * o2.redispatch_exact).epsilon(1e-12));
  CHECK(o2.exact() <= o2.approx());
}

TEST_CASE("zero disturbance objective is the deterministic dispatch cost") {
  const auto c = jtest::six_bus();
  auto u = UncertaintyModel::deterministic(c);
  for (std::size_t w = 0; w < c.dibr.size(); ++w) u.dibr_available[w] = BetaSpec::point(c.dibr[w].capacity_mw);
  const auto set = sample_scenarios(u, c, 5, 1);
  const auto m = build_model(c, set, BuildMode::po());
  for (int j : m.vars.alpha) CHECK(m.det.obj[j] == 0.0);
  // Curtailment constant is c_w * p_cap * dt per DIBR.
  double expect = 0.0;
  for (const auto& w : c.dibr) expect += c.thresholds.dt_h * w.curtail_price * w.capacity_mw;
  for (const auto& g : c.thermal) expect += c.thresholds.dt_h * g.cost(g.p_min);
  CHECK(m.det.obj_offset == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("doubling every cost doubles the optimum and keeps the argmin") {
  auto c = jtest::two_unit_toy();
  const auto set = forecast_scenarios(c, 1);
  const auto r1 = build_and_solve(c, set, BuildMode::po(), Method::Saa);
  for (auto& g : c.thermal) {
    g.cost.linear *= 2;
    g.cost.constant *= 2;
    g.cost.quadratic *= 2;
    g.c_up *= 2;
    g.c_dn *= 2;
    g.c_redispatch *= 2;
  }
  const auto r2 = build_and_solve(c, set, BuildMode::po(), Method::Saa);
  REQUIRE(r1.solution.optimal());
  REQUIRE(r2.solution.optimal());
  CHECK(r2.solution.objective == doctest::Approx(2.0 * r1.solution.objective).epsilon(1e-9));
  CHECK(r2.decision.p_g[0] == doctest::Approx(r1.decision.p_g[0]).epsilon(1e-9));
}

TEST_CASE("single zero-disturbance scenario reduces to a deterministic ED") {
  const auto c = jtest::two_unit_toy();
  const auto set = forecast_scenarios(c, 1);
  const auto r = build_and_solve(c, set, BuildMode::po(), Method::Saa);
  REQUIRE(r.solution.optimal());
  // Brute force: reserves at their minimum, scan p_g1 on a grid.
  const double dt = c.thresholds.dt_h;
  double best = HUGE_VAL;
  for (int k = 0; k <= 70000; ++k) {
    const double p1 = 10.0 + k * 1e-3, p2 = 100.0 - p1;
    double cost = 0.0;
    bool ok = true;
    for (int u = 0; u < 2; ++u) {
      const auto& g = c.thermal[u];
      const double p = u == 0 ? p1 : p2;
      const double rmin = c.thresholds.ss_max / c.f0_hz / g.droop * g.p_max;
      if (p + rmin > g.p_max + 1e-9 || p - rmin < g.p_min - 1e-9) ok = false;
      cost += dt * (g.cost(p) + (g.c_up + g.c_dn) * rmin);
    }
    if (ok) best = std::min(best, cost);
  }
  // The scan step is 1e-3 MW, so the grid optimum can sit just above the LP one.
  CHECK(r.solution.objective <= best + 1e-9);
  CHECK(r.solution.objective == doctest::Approx(best).epsilon(1e-5));
  CHECK(r.decision.p_g[0] + r.decision.p_g[1] == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("freq block with delta_F = 0 is enforced as robust rows") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 30, 2);
  const auto m = build_model(c, set, BuildMode::po());
  REQUIRE(m.blocks.front().kind == ChanceKind::Freq);
  CHECK(m.blocks.front().delta == 0.0);
  ReformStats st;
  const auto p = reformulate(m, set, Method::Saa, {}, &st);
  CHECK(st.blocks.front().robust);
  CHECK(st.blocks.front().indicators == 0);
  for (const auto& v : p.vars) CHECK(v.name.rfind("z_sys", 0) != 0);
}

TEST_CASE("one line and two scenarios give four rows sharing two indicators") {
  auto c = jtest::two_unit_toy();
  c.thresholds.delta_line = 0.5;
  const auto set = from_disturbances(c, {-5.0, 5.0});
  const auto m = build_model(c, set, BuildMode::po());
  const auto it = std::find_if(m.blocks.begin(), m.blocks.end(), [](const auto& b) { return b.kind == ChanceKind::LineFlow; });
  REQUIRE(it != m.blocks.end());
  CHECK(it->rows.size() == 4);
  for (const auto& r : it->rows) CHECK(r.rhs.size() == 2);
  ReformOptions o;
  o.strengthen = false;
  ReformStats st;
  reformulate(m, set, Method::Saa, o, &st);
  const auto& bs = *std::find_if(st.blocks.begin(), st.blocks.end(), [](const auto& b) { return b.family == "L"; });
  CHECK(bs.indicators == 2);
  CHECK(bs.mixing_rows == 4 * 1 * 2);
}

TEST_CASE("nadir boundary with M = 4 gives four deterministic rows") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 50, 1);
  const auto m = build_model(c, set, BuildMode::po());
  REQUIRE(m.boundary.pieces.size() == 4);
  int rows = 0;
  for (const auto& r : m.det.rows) rows += r.name.rfind("nadir_", 0) == 0 && r.name != "nadir_dmin";
  CHECK(rows == 4);
  for (int k = 0; k < 4; ++k) {
    const auto name = "nadir_" + std::to_string(k + 1);
    CHECK(row_named(m.det, name).rhs == m.boundary.pieces[k].alpha);
    const double share = c.dibr[0].capacity_mw / c.p_sys();
    CHECK(coef(m.det, name, "H_w1") == doctest::Approx(share));
    CHECK(coef(m.det, name, "D_w1") == doctest::Approx(m.boundary.pieces[k].beta * share));
  }
}

TEST_CASE("model sizes match the counting table") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 40, 3);
  for (auto mode : {BuildMode::po(), BuildMode::up(), BuildMode::fix(InverterSettings::uniform(c, 2.0, 4.0))}) {
    for (int M : {2, 4}) {
      BuildOptions bo;
      bo.nadir_pieces = M;
      const auto m = build_model(c, set, mode, bo);
      const auto k = expected_counts(c, mode.kind, 3, M, m.boundary.d_lo > 0.0);
      CHECK(m.det.num_vars() == k.vars);
      CHECK(m.det.num_rows() == k.det_rows);
      std::size_t chance = 0;
      for (const auto& b : m.blocks) chance += b.rows.size();
      CHECK(chance == static_cast<std::size_t>(k.chance_rows));
      if (mode.kind == ModeKind::UpIced) CHECK(m.blocks.size() == chance);
    }
  }
}

TEST_CASE("Fix-JCED is never cheaper than Po-JCED on the same scenarios") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 60, 4);
  const auto po = build_and_solve(c, set, BuildMode::po(), Method::Msaa);
  REQUIRE(po.solution.optimal());
  // Fixing the settings Po-JCED chose, then settings that are strictly larger.
  auto s = InverterSettings::from(po.decision);
  const auto same = build_and_solve(c, set, BuildMode::fix(s), Method::Msaa);
  REQUIRE(same.solution.optimal());
  CHECK(same.solution.objective >= po.solution.objective - 1e-6 * std::abs(po.solution.objective));
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    s.H_w[w] = std::min(c.dibr[w].h_max, s.H_w[w] + 1.0);
    s.D_w[w] = std::min(c.dibr[w].d_max, s.D_w[w] + 2.0);
  }
  const auto more = build_and_solve(c, set, BuildMode::fix(s), Method::Msaa);
  REQUIRE(more.solution.optimal());
  CHECK(more.solution.objective >= po.solution.objective - 1e-6 * std::abs(po.solution.objective));
  CHECK(more.decision.H_w == s.H_w);
}

TEST_CASE("Fix-JCED rejects settings outside the device bounds") {
  const auto c = jtest::six_bus();
  CHECK_THROWS_AS(build_model(c, forecast_scenarios(c, 1), BuildMode::fix(InverterSettings::uniform(c, 99.0, 1.0))),
                  ValidationError);
}

TEST_CASE("static infeasibility is a warning, not an error") {
  auto c = jtest::two_unit_toy();
  c.buses[1].load_mw = 5.0;  // below the sum of p_min
  const auto m = build_model(c, forecast_scenarios(c, 1), BuildMode::po());
  CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("symbolic JSON names variables and blocks") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 5, 1);
  const auto m = build_model(c, set, BuildMode::po());
  const auto j = symbolic_to_json(m);
  for (const char* s : {"\"p_g1\"", "\"r_up_g1\"", "\"H_w1\"", "\"dibr_up\"", "\"line_flow\"", "\"alpha_g1\""}) {
    CHECK(j.find(s) != std::string::npos);
  }
  CHECK(symbolic_to_json(build_model(c, set, BuildMode::po())) == j);
}

}
