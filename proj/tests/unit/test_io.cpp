#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "coalesce/experiment.hpp"
#include "coalesce/io.hpp"
#include "coalesce/presets.hpp"
#include "coalesce/simulation.hpp"

using namespace coalesce;

namespace {

ScenarioConfig small() {
  ScenarioConfig s = default_scenario();
  s.n_clients = 4;
  s.n_contractors = 8;
  s.duration_days = 1;
  return s;
}

}  // namespace

TEST_CASE("scenario document round-trips") {
  for (const auto& name : scenario_preset_names()) {
    INFO(name);
    const auto s = *scenario_preset(name);
    const auto doc = to_json(s);
    // Overlaying on an unrelated base must land on the same scenario.
    const auto back = scenario_from_json(doc, stationary_scenario());
    CHECK(to_json(back).dump() == doc.dump());
  }
}

TEST_CASE("partial documents keep the base") {
  const auto base = default_scenario();
  const auto s = scenario_from_json(Json{{"n_clients", 7}}, base);
  CHECK(s.n_clients == 7);
  CHECK(s.n_contractors == base.n_contractors);
  CHECK(s.engine.epsilon == base.engine.epsilon);
}

TEST_CASE("bad documents list every problem") {
  const auto base = default_scenario();
  try {
    scenario_from_json(Json{{"bogus", 1}, {"n_clients", "three"}, {"engine", {{"epsilon", 2.0}}}},
                       base);
    FAIL("expected InvalidInput");
  } catch (const InvalidInput& e) {
    CHECK(e.violations.size() >= 2);
    bool bogus = false;
    for (const auto& v : e.violations) bogus |= v.field == "bogus";
    CHECK(bogus);
  }
  CHECK_THROWS_AS(scenario_from_json(Json{{"engine", {{"epsilon", 1.5}}}}, base), InvalidInput);
  CHECK_THROWS_AS(scenario_from_json(Json::array(), base), InvalidInput);
}

TEST_CASE("dotted overrides") {
  Json doc = Json::object();
  apply_override(doc, "engine.epsilon=0.2");
  apply_override(doc, "n_clients=5");
  apply_override(doc, "history_sharing=none");
  CHECK(doc["engine"]["epsilon"] == 0.2);
  CHECK(doc["n_clients"] == 5);
  CHECK(doc["history_sharing"] == "none");
  const auto s = scenario_from_json(doc, default_scenario());
  CHECK(s.engine.epsilon == 0.2);
  CHECK(s.history_sharing == HistorySharing::none);
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), InvalidInput);
}

TEST_CASE("number format is shortest round-trip") {
  for (double v : {0.1, 1.0 / 3, 1e-300, 123456789.125, -0.0, 41.8, 1e21}) {
    const auto text = format_number(v);
    CHECK(std::stod(text) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()).empty());
  CHECK(format_optional(std::nullopt).empty());
}

TEST_CASE("parse and read errors are invalid input") {
  CHECK_THROWS_AS(parse_json("{nope", "x.json"), InvalidInput);
  CHECK_THROWS_AS(read_file("/nonexistent/dir/file.json"), InvalidInput);
  CHECK(parse_json("{\"a\": 1}", "x")["a"] == 1);
}

TEST_CASE("simulation is deterministic") {
  const auto s = small();
  const auto a = run_simulation(s, 11);
  const auto b = run_simulation(s, 11);
  CHECK(a.metrics == b.metrics);
  REQUIRE(a.ledger.size() == b.ledger.size());
  for (std::size_t i = 0; i < a.ledger.size(); ++i) {
    REQUIRE(to_json(a.ledger[i]).dump() == to_json(b.ledger[i]).dump());
  }
  CHECK(a.metrics.n_decisions > 0);
}

TEST_CASE("engine seed moves only exploration") {
  auto s = small();
  s.engine.epsilon = 0;
  const auto a = run_simulation(s, 1);
  const auto b = run_simulation(s, 2);
  CHECK(a.metrics == b.metrics);
  s.engine.epsilon = 0.3;
  const auto c = run_simulation(s, 1);
  const auto d = run_simulation(s, 2);
  CHECK(c.metrics.n_decisions == d.metrics.n_decisions);
}

TEST_CASE("config echo reproduces the run") {
  auto s = small();
  s.seed = 99;
  const auto echo = to_json(s).dump();
  const auto back = scenario_from_json(Json::parse(echo), default_scenario());
  const auto a = run_simulation(s, default_engine_seed(s.seed));
  const auto b = run_simulation(back, default_engine_seed(back.seed));
  CHECK(a.metrics == b.metrics);
}

TEST_CASE("ledger invariants") {
  const auto r = run_simulation(small(), 3);
  double prev = 0;
  for (const auto& e : r.ledger) {
    CHECK(e.arrival_h >= prev);
    prev = e.arrival_h;
    CHECK(e.completion_h >= e.arrival_h);
    CHECK(is_terminal(e.final_state));
    if (e.decision.exploration) CHECK_FALSE(e.decision.is_local());
    const auto w = e.decision.weights_used.as_array();
    CHECK(std::abs(w[0] + w[1] + w[2] + w[3] - 1.0) < 1e-9);
  }
  CHECK(r.reputation.size() == 1);
  auto s = small();
  s.history_sharing = HistorySharing::none;
  CHECK(run_simulation(s, 3).reputation.size() == 4);
}

TEST_CASE("shipped preset files match the built-ins") {
  const std::filesystem::path dir = COALESCE_SOURCE_DIR "/presets";
  for (const auto& name : scenario_preset_names()) {
    INFO(name);
    const auto doc = parse_json(read_file((dir / (name + ".json")).string()), name);
    CHECK(to_json(scenario_from_json(doc, default_scenario())).dump() ==
          to_json(*scenario_preset(name)).dump());
  }
  for (const auto& name : plan_preset_names()) {
    INFO(name);
    const auto doc = parse_json(read_file((dir / "plans" / (name + ".json")).string()), name);
    CHECK(to_json(plan_from_json(doc)).dump() == to_json(*plan_preset(name)).dump());
  }
}
