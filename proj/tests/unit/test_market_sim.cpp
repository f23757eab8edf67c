#include <doctest.h>

#include <cmath>
#include <map>

#include "../common/checks.hpp"
#include "coalesce/market_sim.hpp"
#include "coalesce/presets.hpp"

using namespace coalesce;

namespace {

ContractorProfile host(double failure = 0, double quality = 0) {
  ContractorProfile c;
  c.id = 1;
  c.skills = {"compute"};
  c.true_failure_prob = failure;
  c.true_quality_degradation_prob = quality;
  c.breach_probs = {};
  return c;
}

Task small_task() {
  Task t = checks::plain_task();
  t.flops_required = 1e13;
  t.value = 5;
  t.required_skills = {"compute"};
  return t;
}

}  // namespace

TEST_CASE("default scenario validates") {
  CHECK(validate(default_scenario()).empty());
  for (const auto& name : scenario_preset_names()) {
    INFO(name);
    auto s = scenario_preset(name);
    REQUIRE(s);
    CHECK(validate(*s).empty());
  }
}

TEST_CASE("scenario validation names the field") {
  ScenarioConfig s = default_scenario();
  s.archetype_mix[0] -= 0.1;
  auto v = validate(s);
  REQUIRE(!v.empty());
  CHECK(v[0].field == "archetype_mix");
  s = default_scenario();
  s.n_clients = 0;
  s.arrival_rate_per_hour = 0;
  CHECK(validate(s).size() >= 2);
  s = default_scenario();
  s.engine.epsilon = 1.5;
  v = validate(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "engine.epsilon");
}

TEST_CASE("single-archetype mix") {
  ScenarioConfig s = default_scenario();
  s.archetype_mix = {0, 0, 1, 0, 0, 0};
  s.n_contractors = 10;
  Rng rng(1);
  const auto pop = generate_population(s, rng);
  REQUIRE(pop.contractors.size() == 10);
  for (const auto& c : pop.contractors) CHECK(c.archetype == Archetype::budget_provider);
}

TEST_CASE("population is deterministic per seed") {
  const ScenarioConfig s = default_scenario();
  Rng a(9), b(9);
  const auto pa = generate_population(s, a);
  const auto pb = generate_population(s, b);
  REQUIRE(pa.contractors.size() == pb.contractors.size());
  for (std::size_t i = 0; i < pa.contractors.size(); ++i) {
    CHECK(pa.contractors[i].archetype == pb.contractors[i].archetype);
    CHECK(pa.contractors[i].skill_embedding == pb.contractors[i].skill_embedding);
    CHECK(pa.contractors[i].base_price == pb.contractors[i].base_price);
  }
  for (const auto& c : pa.contractors) {
    CHECK(c.skill_embedding.size() == s.engine.embedding_dim);
    CHECK(validate(c, s.engine.embedding_dim).empty());
  }
}

TEST_CASE("archetype counts follow the mix") {
  ScenarioConfig s = default_scenario();
  s.n_contractors = 10000;
  Rng rng(77);
  const auto pop = generate_population(s, rng);
  std::array<double, kArchetypeCount> counts{};
  for (const auto& c : pop.contractors) counts[static_cast<std::size_t>(c.archetype)] += 1;
  for (std::size_t a = 0; a < kArchetypeCount; ++a) {
    const double p = s.archetype_mix[a];
    const double sd = std::sqrt(10000 * p * (1 - p));
    INFO("archetype " << a);
    CHECK(std::abs(counts[a] - 10000 * p) <= 3 * sd);
  }
}

TEST_CASE("task centroids share the requested similarity") {
  const auto c = task_type_centroids(16, 0.6);
  for (std::size_t i = 0; i < kTaskTypeCount; ++i) {
    CHECK(c[i].size() == 16);
    for (std::size_t j = i + 1; j < kTaskTypeCount; ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < 16; ++k) dot += c[i][k] * c[j][k];
      CHECK(dot == doctest::Approx(0.6));
    }
  }
  const auto same = task_type_centroids(16, 0.6);
  CHECK(same[2] == c[2]);
}

TEST_CASE("task stream") {
  ScenarioConfig s = default_scenario();
  s.duration_days = 0;
  Rng r0(1);
  CHECK(generate_tasks(s, r0).empty());

  s = default_scenario();
  Rng a(3), b(3);
  const auto ta = generate_tasks(s, a);
  const auto tb = generate_tasks(s, b);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].id == i);
    CHECK(ta[i].arrival_time_h == tb[i].arrival_time_h);
    CHECK(ta[i].flops_required == tb[i].flops_required);
    if (i) CHECK(ta[i].arrival_time_h >= ta[i - 1].arrival_time_h);
    CHECK(validate(ta[i], s.engine.embedding_dim).empty());
  }
}

TEST_CASE("poisson arrival count") {
  ScenarioConfig s = default_scenario();
  s.n_clients = 1;
  s.duration_days = 1;
  double total = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    total += static_cast<double>(generate_tasks(s, rng).size());
  }
  const double mean = total / 1000;
  // Mean of 1000 Poisson(60) counts: standard error sqrt(60 / 1000).
  CHECK(std::abs(mean - 60) <= 3 * std::sqrt(60.0 / 1000));
}

TEST_CASE("zero volatility leaves the market unchanged") {
  ScenarioConfig s = default_scenario();
  s.volatility = {0.8, 0.8, 0, 0};
  Rng rng(4);
  auto pop = generate_population(s, rng);
  const MarketState m0 = initial_market(s, pop.contractors);
  const auto before = pop.contractors;
  MarketState m = m0;
  for (int i = 0; i < 10; ++i) m = step_market(m, pop.contractors, s.volatility, rng);
  CHECK(m.current_demand == m0.current_demand);
  CHECK(m.available_supply == doctest::Approx(m0.available_supply).epsilon(1e-12));
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(pop.contractors[i].base_price == before[i].base_price);
    CHECK(pop.contractors[i].capacity_utilization == before[i].capacity_utilization);
  }
}

TEST_CASE("market steps keep supply in bounds and demand centered") {
  ScenarioConfig s = default_scenario();
  Rng rng(8);
  auto pop = generate_population(s, rng);
  MarketState m = initial_market(s, pop.contractors);
  const double base = m.current_demand;
  double sum = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    m = step_market(m, pop.contractors, s.volatility, rng);
    REQUIRE(m.available_supply >= 0);
    REQUIRE(m.available_supply <= m.total_supply);
    REQUIRE(m.market_pressure >= 0);
    REQUIRE(m.market_pressure <= 1);
    sum += m.current_demand;
  }
  CHECK(std::abs(sum / n - base) <= 0.02 * base);
}

TEST_CASE("noiseless execution bills the estimate") {
  const auto c = host();
  const Task t = small_task();
  const CostBreakdown est = CostBreakdown::external(1.5, 0.01, 0, 0, 0, 0);
  ExecutionOptions opt;
  opt.noise_sigma = 0;
  Rng rng(1);
  const auto out = execute_task(t, ContractorExecutor{&c, est}, 0, opt, rng);
  CHECK(out.result == Outcome::success);
  CHECK(out.actual_cost == est.total());
  CHECK(out.actual_latency_s == doctest::Approx(estimated_latency_s(t, c)));
  CHECK(out.lifecycle.state() == LifecycleState::completed);
}

TEST_CASE("certain failure ends failed and still bills") {
  const auto c = host(1.0);
  const Task t = small_task();
  const CostBreakdown est = CostBreakdown::external(1.5, 0.01, 0, 0, 0, 0);
  ExecutionOptions opt;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto out = execute_task(t, ContractorExecutor{&c, est}, 0, opt, rng);
    REQUIRE(out.result == Outcome::failure);
    REQUIRE(out.lifecycle.state() == LifecycleState::failed);
    REQUIRE(out.actual_cost > 0);
  }
}

TEST_CASE("lognormal cost noise has the right mean") {
  const auto c = host();
  const Task t = small_task();
  const CostBreakdown est = CostBreakdown::external(2.0, 0, 0, 0, 0, 0);
  ExecutionOptions opt;
  opt.noise_sigma = 0.1;
  Rng rng(3);
  const int n = 10000;
  std::vector<double> ratio(n);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    ratio[i] = execute_task(t, ContractorExecutor{&c, est}, 0, opt, rng).actual_cost / 2.0;
    sum += ratio[i];
  }
  const double mean = sum / n;
  const double want = std::exp(0.005);
  const double sd = std::sqrt((std::exp(0.01) - 1) * std::exp(0.01));
  CHECK(std::abs(mean - want) <= 3 * sd / std::sqrt(n));
}

TEST_CASE("outcome frequencies match hidden probabilities") {
  auto c = host(0.2, 0.1);
  const Task t = small_task();
  const CostBreakdown est = CostBreakdown::external(1, 0, 0, 0, 0, 0);
  ExecutionOptions opt;
  Rng rng(5);
  const int n = 2000;
  std::map<Outcome, int> seen;
  for (int i = 0; i < n; ++i) ++seen[execute_task(t, ContractorExecutor{&c, est}, 0, opt, rng).result];
  auto band = [&](double p) { return 3 * std::sqrt(p * (1 - p) / n); };
  CHECK(std::abs(seen[Outcome::failure] / double(n) - 0.2) <= band(0.2));
  // Quality is drawn only when the task did not fail.
  CHECK(std::abs(seen[Outcome::quality_degraded] / double(n) - 0.8 * 0.1) <= band(0.08));
}

TEST_CASE("lifecycle is legal for every executed task") {
  auto c = host(0.3, 0.2);
  c.breach_probs = {0.2};
  Task t = small_task();
  t.data_sensitivity = 0.8;
  const CostBreakdown est = CostBreakdown::external(1, 0, 0, 0, 0, 0);
  ExecutionOptions opt;
  opt.input_required_prob = 0.3;
  Rng rng(6);
  for (int i = 0; i < 10000; ++i) {
    const auto out = execute_task(t, ContractorExecutor{&c, est}, 1.0, opt, rng);
    const auto& h = out.lifecycle.history();
    REQUIRE(is_terminal(h.back().state));
    for (std::size_t k = 1; k < h.size(); ++k) {
      REQUIRE(checks::oracle_legal(h[k - 1].state, h[k].state));
      REQUIRE(h[k].time_h >= h[k - 1].time_h);
    }
  }
}

TEST_CASE("local execution is exact and hosts only what fits") {
  HardwareSpec hw;
  Task t = small_task();
  const auto est = internal_cost(t, hw, {});
  Rng rng(1);
  const auto out = execute_task(t, LocalExecutor{&hw, est, 60}, 0, ExecutionOptions{}, rng);
  CHECK(out.actual_cost == est.total());
  CHECK(out.actual_latency_s == doctest::Approx(60 + 10));
  t.model_memory_bytes = 1e12;
  CHECK_THROWS_AS(execute_task(t, LocalExecutor{&hw, est, 0}, 0, ExecutionOptions{}, rng),
                  std::invalid_argument);
}

TEST_CASE("skill coverage drives the mismatch penalty") {
  ContractorProfile c;
  c.skills = {"finance", "risk"};
  c.true_quality_degradation_prob = 0.05;
  Task t;
  t.required_skills = {"finance", "nlp", "risk", "text"};
  CHECK(skill_coverage(c.skills, t.required_skills) == 0.5);
  CHECK(skill_coverage(c.skills, {}) == 1.0);
  CHECK(true_quality_prob(c, t, 0.4) == doctest::Approx(0.25));
  CHECK(true_quality_prob(c, t, 5.0) == 1.0);
}

TEST_CASE("history sharing names") {
  for (auto h : {HistorySharing::none, HistorySharing::reputation, HistorySharing::full}) {
    CHECK(parse_history_sharing(to_string(h)) == h);
  }
  CHECK_FALSE(parse_history_sharing("gossip"));
}
