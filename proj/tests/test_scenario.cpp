#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "jcedkit/error.hpp"
#include "jcedkit/scenario.hpp"
#include "test_support.hpp"

using namespace jced;

namespace {

// Brute-force quantiles straight from the definitions.
double upper_oracle(const std::vector<double>& v, const std::vector<double>& p, double delta) {
  double best = HUGE_VAL;
  for (double c : v) {
    double exceed = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > c) exceed += p[i];
    }
    if (exceed <= delta + 1e-12) best = std::min(best, c);
  }
  return best;
}

double lower_oracle(const std::vector<double>& v, const std::vector<double>& p, double delta) {
  double best = -HUGE_VAL;
  for (double c : v) {
    double below = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < c) below += p[i];
    }
    if (below <= delta + 1e-12) best = std::max(best, c);
  }
  return best;
}

GridCase scenario_case() {
  auto c = jtest::chain(3);
  c.buses[1].load_mw = 50.0;
  c.buses[2].load_mw = 30.0;
  c.buses[2].ibr_mw = 10.0;
  c.thermal.push_back(jtest::unit(1, 1, 0.0, 200.0, 20.0));
  c.dibr.push_back({1, 2, 60.0, 40.0, 12.0, 5.0, 10.0});
  return c;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("degenerate specs give zero disturbance and forecast availability") {
  const auto c = scenario_case();
  const auto set = sample_scenarios(UncertaintyModel::deterministic(c), c, 50, 11);
  REQUIRE(set.size() == 50);
  for (const auto& s : set.scenarios) {
    CHECK(s.dp_load == 0.0);
    CHECK(s.pbar[0] == 40.0);
    CHECK(s.prob == doctest::Approx(1.0 / 50.0));
  }
}

TEST_CASE("dp_L is exactly the sum of bus errors") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 200, 5);
  for (const auto& s : set.scenarios) {
    CHECK(s.dp_load == disturbance_of(s.zeta_d, s.zeta_h));
  }
}

TEST_CASE("sampling is deterministic and independent of the worker count") {
  const auto c = jtest::six_bus();
  const auto u = jtest::six_bus_uncertainty(c);
  const auto a = sample_scenarios(u, c, 300, 9, 1);
  const auto b = sample_scenarios(u, c, 300, 9, 4);
  CHECK(scenarios_to_csv(a, c) == scenarios_to_csv(b, c));
  const auto d = sample_scenarios(u, c, 300, 10, 1);
  CHECK(scenarios_to_csv(a, c) != scenarios_to_csv(d, c));
  // A prefix of a longer run is the shorter run.
  const auto e = sample_scenarios(u, c, 400, 9, 1);
  for (std::size_t i = 0; i < 300; ++i) CHECK(e.scenarios[i].zeta_d == a.scenarios[i].zeta_d);
}

TEST_CASE("draws respect their support") {
  const auto c = jtest::six_bus();
  const auto u = jtest::six_bus_uncertainty(c);
  const auto set = sample_scenarios(u, c, 2000, 3);
  for (const auto& s : set.scenarios) {
    for (std::size_t b = 0; b < c.buses.size(); ++b) {
      CHECK(s.zeta_d[b] >= u.load_error[b].lo);
      CHECK(s.zeta_d[b] <= u.load_error[b].hi);
      CHECK(s.zeta_h[b] >= u.ibr_error[b].lo);
      CHECK(s.zeta_h[b] <= u.ibr_error[b].hi);
    }
    for (std::size_t w = 0; w < c.dibr.size(); ++w) {
      CHECK(s.pbar[w] >= u.dibr_available[w].lo);
      CHECK(s.pbar[w] <= u.dibr_available[w].hi);
    }
  }
}

TEST_CASE("symmetric beta sample mean lies within three standard errors") {
  auto c = scenario_case();
  auto u = UncertaintyModel::deterministic(c);
  u.load_error[1] = {2.0, 2.0, -10.0, 10.0};
  const std::size_t n = 100000;
  const auto set = sample_scenarios(u, c, n, 42);
  double sum = 0.0;
  for (const auto& s : set.scenarios) sum += s.zeta_d[1];
  const double mean = sum / static_cast<double>(n);
  const double se = std::sqrt(u.load_error[1].variance() / static_cast<double>(n));
  CHECK(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("empirical quantile examples") {
  const std::vector<double> v{-2, -1, 0, 1, 2};
  const std::vector<double> p(5, 0.2);
  CHECK(empirical_quantile(v, p, 0.2, QuantileSide::Upper) == 1.0);
  CHECK(empirical_quantile(v, p, 0.2, QuantileSide::Lower) == -1.0);
  CHECK(empirical_quantile(v, p, 0.0, QuantileSide::Upper) == 2.0);
  CHECK(empirical_quantile(v, p, 0.0, QuantileSide::Lower) == -2.0);
}

TEST_CASE("disturbance quantile examples") {
  auto c = scenario_case();
  ScenarioSet set;
  for (double dp : {-4.0, -2.0, 0.0, 2.0, 4.0}) {
    Scenario s;
    s.index = set.size();
    s.prob = 0.2;
    s.zeta_d.assign(3, 0.0);
    s.zeta_h.assign(3, 0.0);
    s.zeta_d[1] = dp;
    s.dp_load = dp;
    s.pbar = {40.0};
    set.scenarios.push_back(s);
  }
  Thresholds t;
  t.delta_f = 0.0;
  t.delta_r = 0.4;
  const auto q = disturbance_quantiles(set, t);
  CHECK(q.abs_dp_qF == 4.0);
  CHECK(q.dp_up_qR == upper_oracle({-4, -2, 0, 2, 4}, std::vector<double>(5, 0.2), 0.2));
  CHECK(q.dp_up_qR == 2.0);
  CHECK(q.dp_dn_qR == -2.0);

  const auto zero = forecast_scenarios(c, 10);
  const auto qz = disturbance_quantiles(zero, t);
  CHECK(qz.abs_dp_qF == 0.0);
  CHECK(qz.dp_up_qR == 0.0);
  CHECK(qz.dp_dn_qR == 0.0);
}

TEST_CASE("quantiles agree with the brute-force oracle on random weighted data") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-5.0, 5.0), w(0.1, 1.0), d(0.0, 0.5);
  std::uniform_int_distribution<int> len(1, 25), tie(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = len(rng);
    std::vector<double> v(n), p(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = tie(rng) == 0 && i > 0 ? v[i - 1] : std::round(u(rng) * 4.0) / 4.0;
      p[i] = w(rng);
      s += p[i];
    }
    for (auto& x : p) x /= s;
    const double delta = d(rng);
    CHECK(empirical_quantile(v, p, delta, QuantileSide::Upper) == upper_oracle(v, p, delta));
    CHECK(empirical_quantile(v, p, delta, QuantileSide::Lower) == lower_oracle(v, p, delta));
  }
}

TEST_CASE("upper quantile is monotone in delta and weights agree with equal weights") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 3.0);
  std::vector<double> v(97);
  for (auto& x : v) x = g(rng);
  const std::vector<double> eq(v.size(), 1.0 / static_cast<double>(v.size()));
  double prev = HUGE_VAL;
  for (double delta = 0.0; delta <= 1.0; delta += 0.01) {
    const double q = empirical_quantile(v, eq, delta, QuantileSide::Upper);
    CHECK(q <= prev);
    prev = q;
  }
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  // 10 of 97 may exceed: the 11th largest.
  CHECK(empirical_quantile(v, eq, 10.0 / 97.0, QuantileSide::Upper) == sorted[97 - 11]);
}

TEST_CASE("CSV round trip is exact and carries the seed") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 64, 123);
  const auto text = scenarios_to_csv(set, c);
  CHECK(text.find("123") != std::string::npos);
  CHECK(text.find("i,p_i,dp_L,zeta_d_1") != std::string::npos);
  const auto back = scenarios_from_csv(text, c);
  REQUIRE(back.size() == set.size());
  CHECK(back.seed == 123);
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(back.scenarios[i].dp_load == set.scenarios[i].dp_load);
    CHECK(back.scenarios[i].zeta_d == set.scenarios[i].zeta_d);
    CHECK(back.scenarios[i].pbar == set.scenarios[i].pbar);
  }
  CHECK(scenarios_to_csv(back, c) == text);
}

TEST_CASE("CSV with an inconsistent dp_L is rejected") {
  const auto c = jtest::six_bus();
  const auto set = sample_scenarios(jtest::six_bus_uncertainty(c), c, 3, 1);
  auto s = set;
  s.scenarios[1].dp_load += 1.0;
  CHECK_THROWS_AS(scenarios_from_csv(scenarios_to_csv(s, c), c), Error);
}

TEST_CASE("method-of-moments fit recovers the shape") {
  auto c = scenario_case();
  auto u = UncertaintyModel::deterministic(c);
  u.load_error[1] = {3.0, 5.0, -10.0, 10.0};
  const auto set = sample_scenarios(u, c, 50000, 8);
  std::vector<double> xs;
  for (const auto& s : set.scenarios) xs.push_back(s.zeta_d[1]);
  const auto fit = fit_beta_moments(xs, -10.0, 10.0);
  CHECK(fit.a == doctest::Approx(3.0).epsilon(0.05));
  CHECK(fit.b == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("invalid requests") {
  const auto c = jtest::six_bus();
  const auto u = jtest::six_bus_uncertainty(c);
  CHECK_THROWS_AS(sample_scenarios(u, c, 0, 1), ValidationError);
  CHECK_THROWS_AS(parse_uncertainty(R"({"load_error":[{"bus":2,"a":-1,"b":2,"lo":-1,"hi":1}]})", c), Error);
  CHECK_THROWS_AS(parse_uncertainty(R"({"load_error":[{"bus":77,"a":2,"b":2,"lo":-1,"hi":1}]})", c), Error);
  CHECK_THROWS_AS(empirical_quantile({}, {}, 0.1, QuantileSide::Upper), Error);
}

}
