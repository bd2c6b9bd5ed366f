#include "doctest.h"

#include "jcedkit/decision.hpp"
#include "jcedkit/error.hpp"
#include "jcedkit/run_config.hpp"
#include "test_support.hpp"

using namespace jced;

TEST_SUITE("config") {

TEST_CASE("run config round trip and defaults") {
  const auto cfg = parse_run_config(R"({"case": "c.json", "n": 500, "seed": 7, "methods": ["saa", "msaa"],
                                        "mode": "up-iced", "thresholds": {"delta_L": 0.1}})");
  CHECK(cfg.n == 500);
  CHECK(cfg.seed == 7);
  CHECK(cfg.methods == std::vector<Method>{Method::Saa, Method::Msaa});
  CHECK(cfg.mode == ModeKind::UpIced);
  CHECK(cfg.thresholds.at("delta_L") == 0.1);
  CHECK(cfg.time_limit_s == 300.0);
  CHECK(cfg.test_n == 10000);
  const auto again = parse_run_config(dump_run_config(cfg));
  CHECK(dump_run_config(again) == dump_run_config(cfg));
}

TEST_CASE("run config errors") {
  const std::string case_path = jtest::six_bus_path().string();
  auto ok = parse_run_config(R"({"case": ")" + case_path + R"("})");
  CHECK_NOTHROW(ok.validate());
  auto zero = parse_run_config(R"({"case": ")" + case_path + R"(", "n": 0})");
  CHECK_THROWS_AS(zero.validate(), ValidationError);
  auto missing = parse_run_config(R"({"case": "/nonexistent/case.json"})");
  CHECK_THROWS_AS(missing.validate(), ValidationError);
  CHECK_THROWS_AS(parse_run_config(R"({"bogus": 1})"), ParseError);
  CHECK_THROWS_AS(parse_run_config(R"({"methods": ["simplex"]})"), Error);
  CHECK_THROWS_AS(parse_run_config("{"), ParseError);
}

TEST_CASE("threshold overrides use the case keys") {
  Thresholds t;
  apply_threshold(t, "df_rate_max", 0.4);
  apply_threshold(t, "delta_DIBR", 0.1);
  CHECK(t.rocof_max == 0.4);
  CHECK(t.delta_dibr == 0.1);
  CHECK_THROWS_AS(apply_threshold(t, "nope", 1.0), Error);
  const auto [k, v] = parse_threshold_assignment("delta_F=0.02");
  CHECK(k == "delta_F");
  CHECK(v == 0.02);
  CHECK_THROWS_AS(parse_threshold_assignment("delta_F"), Error);
}

TEST_CASE("uncertainty file sits next to the case") {
  CHECK(default_uncertainty_path("a/b/six_bus.json") == std::filesystem::path("a/b/six_bus.uncertainty.json"));
}

TEST_CASE("decision JSON round trip") {
  const auto c = jtest::six_bus();
  auto d = DispatchDecision::zeros(c);
  d.p_g = {100.1, 200.0 / 3.0, 50};
  d.H_w = {1.25, 3.0};
  const auto back = decision_from_json(decision_to_json(d, c), c);
  CHECK(back == d);
  auto bad = d;
  bad.p_g.pop_back();
  CHECK_THROWS_AS(bad.check_dimensions(c), ValidationError);
}

}
