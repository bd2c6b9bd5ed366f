#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "jcedkit/dynamics.hpp"
#include "jcedkit/error.hpp"
#include "jcedkit/nadir_boundary.hpp"
#include "jcedkit/sfr.hpp"
#include "test_support.hpp"

using namespace jced;

namespace {

SfrAggregates make_agg(double H, double D, double K, double F, double T, double p_sys = 1000.0) {
  SfrAggregates a;
  a.H_G = H;
  a.D_O = D;
  a.R_G_inv = K;
  a.F_H = F;
  a.T_R = T;
  a.p_sys = p_sys;
  return a;
}

GridCase two_unit_sfr_case() {
  auto c = jtest::chain(2);
  auto g1 = jtest::unit(1, 1, 0.0, 100.0, 20.0);
  g1.inertia = 4.0;
  g1.droop = 0.05;
  auto g2 = jtest::unit(2, 2, 0.0, 200.0, 25.0);
  g2.inertia = 6.0;
  g2.droop = 0.04;
  c.thermal = {g1, g2};
  c.p_sys_override = 300.0;
  return c;
}

}  // namespace

TEST_SUITE("freq-envelope") {

TEST_CASE("single unit aggregates") {
  auto c = jtest::chain(2);
  auto g = jtest::unit(1, 1, 0.0, 150.0, 20.0);
  g.hp_fraction = 0.27;
  g.reheat_time = 6.5;
  c.thermal = {g};
  const auto a = thermal_aggregate(c);
  CHECK(a.p_sys == 150.0);
  CHECK(a.H_G == doctest::Approx(g.inertia));
  REQUIRE(a.lambda.size() == 1);
  CHECK(a.lambda[0] == 1.0);
  CHECK(a.F_H == doctest::Approx(0.27));
  CHECK(a.T_R == doctest::Approx(6.5));
  CHECK(a.H_W == 0.0);
  CHECK(a.H_E == 0.0);
}

TEST_CASE("two-unit aggregates match hand evaluation") {
  const auto c = two_unit_sfr_case();
  const auto a = thermal_aggregate(c);
  CHECK(a.H_G == doctest::Approx((4.0 * 100 + 6.0 * 200) / 300.0).epsilon(1e-12));
  CHECK(a.H_G == doctest::Approx(5.3333).epsilon(1e-4));
  CHECK(a.R_G_inv == doctest::Approx((100 / 0.05 + 200 / 0.04) / 300.0).epsilon(1e-12));
  CHECK(a.R_G_inv == doctest::Approx(23.3333).epsilon(1e-4));
  // Weights proportional to P/R.
  CHECK(a.lambda[0] == doctest::Approx(2000.0 / 7000.0));
  CHECK(a.lambda[0] + a.lambda[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("aggregate is linear in each inverter setting") {
  const auto c = jtest::six_bus();
  const auto s0 = InverterSettings::zeros(c);
  auto s1 = s0, s2 = s0, s12 = s0;
  s1.H_w[0] = 3.0;
  s1.D_e[0] = 7.0;
  s2.H_w[0] = 2.0;
  s2.D_w[1] = 11.0;
  s12.H_w[0] = 5.0;
  s12.D_e[0] = 7.0;
  s12.D_w[1] = 11.0;
  const auto a0 = aggregate(c, s0), a1 = aggregate(c, s1), a2 = aggregate(c, s2), a12 = aggregate(c, s12);
  CHECK(a12.H_W - a0.H_W == doctest::Approx((a1.H_W - a0.H_W) + (a2.H_W - a0.H_W)).epsilon(1e-12));
  CHECK(a12.D_W == doctest::Approx(a1.D_W + a2.D_W).epsilon(1e-12));
  CHECK(a12.D_E == doctest::Approx(a1.D_E + a2.D_E).epsilon(1e-12));
  CHECK(a1.H_W == doctest::Approx(3.0 * 150.0 / c.p_sys()).epsilon(1e-12));
}

TEST_CASE("RoCoF examples") {
  auto a = make_agg(5.0, 1.0, 20.0, 0.3, 7.0, 1000.0);
  CHECK(rocof(0.0, a, 60.0) == 0.0);
  CHECK(rocof(100.0, a, 60.0) == doctest::Approx(-0.6).epsilon(1e-12));
  auto b = a;
  b.H_G = 10.0;
  CHECK(rocof(100.0, b, 60.0) == doctest::Approx(0.5 * rocof(100.0, a, 60.0)).epsilon(1e-12));
  CHECK_THROWS_AS(rocof(1.0, make_agg(0.0, 1.0, 1.0, 0.3, 7.0), 60.0), NumericalError);
}

TEST_CASE("steady-state examples") {
  auto a = make_agg(5.0, 1.0, 20.0, 0.3, 7.0, 1000.0);
  CHECK(steady_state_dev(0.0, a, 60.0) == 0.0);
  CHECK(steady_state_dev(100.0, a, 60.0) == doctest::Approx(-0.2857).epsilon(1e-4));
  CHECK(steady_state_dev(100.0, a, 60.0) == doctest::Approx(-6.0 / 21.0).epsilon(1e-12));
  CHECK(steady_state_dev(-40.0, a, 60.0) > 0.0);
  CHECK_THROWS_AS(steady_state_dev(1.0, make_agg(5.0, 0.0, 0.0, 0.3, 7.0), 60.0), NumericalError);
}

TEST_CASE("nadir of the six-bus aggregates matches the ODE") {
  const auto c = jtest::six_bus();
  const double dp = 0.1 * c.net_load();
  for (double H : {0.0, 2.0, 6.0}) {
    for (double D : {0.0, 10.0, 30.0}) {
      const auto agg = aggregate(c, InverterSettings::uniform(c, H, D));
      const auto nr = nadir_closed_form(dp, agg, c.f0_hz);
      SimConfig cfg;
      cfg.dp_mw = dp;
      const auto m = metrics(simulate(agg, cfg, c.f0_hz));
      CHECK(jtest::rel_close(nr.deviation_hz, m.nadir, 0.02));
      CHECK(std::abs(nr.deviation_hz) >= std::abs(steady_state_dev(dp, agg, c.f0_hz)) * (1.0 - 1e-12));
    }
  }
  CHECK(nadir_closed_form(0.0, thermal_aggregate(c), 60.0).deviation_hz == 0.0);
}

TEST_CASE("underdamped peak time and value match the ODE") {
  const auto agg = make_agg(4.0, 1.0, 20.0, 0.3, 8.0, 500.0);
  const auto nr = nadir_closed_form(50.0, agg, 60.0);
  REQUIRE(nr.form.underdamped);
  CHECK(nr.form.omega_n > 0.0);
  SimConfig cfg;
  cfg.dp_mw = 50.0;
  const auto m = metrics(simulate(agg, cfg, 60.0));
  CHECK(nr.form.t_max == doctest::Approx(m.nadir_time).epsilon(0.01));
  CHECK(nr.deviation_hz == doctest::Approx(m.nadir).epsilon(1e-4));
  CHECK(step_response_hz(nr.form.t_max, 50.0, agg, 60.0) == doctest::Approx(nr.deviation_hz).epsilon(1e-12));
}

TEST_CASE("overdamped regime uses the real-pole form") {
  // Large damping makes the poles real.
  const auto agg = make_agg(1.0, 40.0, 30.0, 0.3, 7.0, 500.0);
  const auto nr = nadir_closed_form(50.0, agg, 60.0);
  CHECK_FALSE(nr.form.underdamped);
  SimConfig cfg;
  cfg.dp_mw = 50.0;
  cfg.horizon = 120.0;
  const auto m = metrics(simulate(agg, cfg, 60.0));
  CHECK(jtest::rel_close(nr.deviation_hz, m.nadir, 1e-4));
}

TEST_CASE("PFR headroom bound") {
  Thresholds t;
  CHECK(pfr_headroom_bound(0.0, 0.0, t, 60.0, 100.0) == 0.0);
  CHECK(pfr_headroom_bound(3.0, 8.0, t, 60.0, 100.0) == doctest::Approx(11.6667).epsilon(1e-4));
  CHECK(pfr_headroom_bound(3.0, 8.0, t, 60.0, 100.0) ==
        doctest::Approx((2 * 3 * 0.5 / 60.0 + 8 * 0.5 / 60.0) * 100).epsilon(1e-12));
  double prev = -1.0;
  for (double H = 0.0; H <= 10.0; H += 0.5) {
    const double v = pfr_headroom_bound(H, 4.0, t, 60.0, 50.0);
    CHECK(v >= prev);
    prev = v;
  }
  prev = -1.0;
  for (double D = 0.0; D <= 30.0; D += 1.5) {
    const double v = pfr_headroom_bound(2.0, D, t, 60.0, 50.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("one piece through two samples binds at both") {
  const std::vector<BoundarySample> pts{{0.0, 3.0}, {2.0, 1.0}};
  const auto p = fit_piece_above(pts);
  CHECK(p(0.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(p(2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.beta == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constrained piece lies above every sample and matches a brute-force search") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BoundarySample> pts;
    for (int k = 0; k < 8; ++k) pts.push_back({0.5 * k, 4.0 - 0.4 * k + 0.3 * u(rng) + 0.05 * k * k});
    double sse = 0.0;
    const auto p = fit_piece_above(pts, &sse);
    for (const auto& q : pts) CHECK(p(q.D) >= q.H);
    // Grid search over slopes with the tightest feasible intercept.
    double best = HUGE_VAL;
    for (double beta = -3.0; beta <= 3.0; beta += 1e-4) {
      double alpha = -HUGE_VAL;
      for (const auto& q : pts) alpha = std::max(alpha, q.H + beta * q.D);
      double s = 0.0;
      for (const auto& q : pts) s += (alpha - beta * q.D - q.H) * (alpha - beta * q.D - q.H);
      best = std::min(best, s);
    }
    CHECK(sse <= best + 1e-6);
  }
}

TEST_CASE("nadir boundary is conservative for M in {2, 4, 8}") {
  const auto c = jtest::six_bus();
  const auto base = thermal_aggregate(c);
  const double dp = 0.12 * c.net_load();
  for (int M : {2, 4, 8}) {
    const auto b = fit_nadir_boundary(c, dp, M);
    CHECK(b.pieces.size() == static_cast<std::size_t>(M));
    for (const auto& s : b.samples) CHECK(b(s.D) >= s.H);
    for (int k = 0; k < 50; ++k) {
      const double D = b.d_lo + (b.d_hi - b.d_lo) * k / 49.0;
      auto a = base;
      a.H_W = std::max(0.0, b(D));
      a.D_W = D;
      CHECK(std::abs(nadir_closed_form(dp, a, c.f0_hz).deviation_hz) <= c.thresholds.nadir_max + 1e-6);
    }
  }
}

TEST_CASE("boundary samples sit on the threshold") {
  const auto c = jtest::six_bus();
  const auto base = thermal_aggregate(c);
  const double dp = 0.12 * c.net_load();
  const auto b = fit_nadir_boundary(c, dp, 4);
  for (const auto& s : b.samples) {
    if (s.H <= 0.0) continue;
    auto a = base;
    a.H_W = s.H;
    a.D_W = s.D;
    CHECK(std::abs(nadir_closed_form(dp, a, 60.0).deviation_hz) == doctest::Approx(0.5).epsilon(1e-4));
  }
}

TEST_CASE("larger nested M never increases the fitting error") {
  const auto c = jtest::six_bus();
  BoundaryOptions o;
  o.check_grid = 0;
  const auto b = fit_nadir_boundary(c, 0.12 * c.net_load(), 1, o);
  double prev = HUGE_VAL;
  for (int M : {1, 2, 4, 8, 16}) {
    double sse = 0.0;
    fit_pwl_pieces(b.samples, M, &sse);
    CHECK(sse <= prev + 1e-12);
    prev = sse;
  }
}

TEST_CASE("unreachable threshold is reported") {
  const auto c = jtest::six_bus();
  CHECK_THROWS_AS(fit_nadir_boundary(c, 10.0 * c.net_load(), 4), ValidationError);
  CHECK_THROWS_AS(fit_nadir_boundary(thermal_aggregate(c), 10.0, 0.0, 60.0, 4, 1.0, 1.0), ValidationError);
}

}
