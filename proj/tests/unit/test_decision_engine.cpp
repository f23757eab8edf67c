#include <doctest.h>

#include "../common/checks.hpp"
#include "coalesce/decision_engine.hpp"
#include "coalesce/io.hpp"

using namespace coalesce;

namespace {

struct Fixture {
  EngineConfig cfg;
  Task task;
  MarketState market;
  HardwareSpec local;
  std::vector<ContractorProfile> pool;
  DecisionHistory history{cfg};

  Fixture() {
    cfg.embedding_dim = 2;
    task.id = 1;
    task.task_type = TaskType::risk_assessment;
    task.flops_required = 3.6e15;
    task.value = 10;
    task.urgency = 0.5;
    task.data_sensitivity = 0.5;
    task.required_skills = {"finance", "risk"};
    task.requirement_embedding = {1, 0};
    task.model_memory_bytes = 1e9;
    market.total_supply = 10;
    market.available_supply = 5;
    market.current_demand = 5;
    market.market_pressure = 0.5;
    market.failure_rate = 0.1;
    local.peak_flops = 1e12;
    local.hw_cost_per_hour = 20;
  }

  ContractorProfile contractor(ContractorId id, double price, double flops) const {
    ContractorProfile c;
    c.id = id;
    c.skills = {"finance", "risk"};
    c.skill_embedding = {1, 0};
    c.base_price = price;
    c.nominal_base_price = price;
    c.hardware.peak_flops = flops;
    c.breach_probs = {0.01};
    c.channel_security = 0.9;
    return c;
  }

  DecisionContext ctx() const { return {task, pool, market, history, local, {}, 0.0}; }
};

}  // namespace

TEST_CASE("jaccard and cosine") {
  CHECK(jaccard({"a", "b"}, {"b", "c"}) == doctest::Approx(1.0 / 3));
  CHECK(jaccard({}, {}) == 1.0);
  CHECK(jaccard({"a"}, {}) == 0.0);
  const std::vector<double> a = {1, 0}, b = {0, 1}, c = {1, 2, 3};
  CHECK(cosine_similarity(a, b) == 0.0);
  CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cosine_similarity(a, c), std::invalid_argument);
}

TEST_CASE("compatibility uses 0.5 performance without history") {
  Fixture f;
  const auto c = f.contractor(1, 1, 1e13);
  CHECK(skill_compatibility(c, f.task, f.history) == doctest::Approx(0.3 + 0.5 + 0.1));
  f.history.record_outcome(1, TaskType::risk_assessment, Outcome::success, 1);
  CHECK(skill_compatibility(c, f.task, f.history) == doctest::Approx(1.0));
}

TEST_CASE("weights stay on the simplex") {
  CHECK(checks::weight_simplex_violations(10000, 41) == 0);
  CHECK(normalize(WeightVector{0, 0, 0, 0}) == WeightVector{});
}

TEST_CASE("correlation adjust with no correlation keeps the weights") {
  CriteriaMatrix m;
  m.add(0, {1, 5, 2, 7});
  m.add(1, {1, 5, 2, 7});
  const WeightVector w{0.1, 0.2, 0.3, 0.4};
  const auto out = correlation_adjust(w, m, 0.3);
  CHECK(out.cost == doctest::Approx(0.1));
  CHECK(out.security == doctest::Approx(0.4));
}

TEST_CASE("topsis matches the step-by-step oracle") {
  const auto rep = checks::topsis_vs_oracle(1000, 51);
  CHECK(rep.mismatches == 0);
  CHECK(rep.domination_failures == 0);
  CHECK(rep.max_error < 1e-12);
}

TEST_CASE("topsis edge cases") {
  CHECK_THROWS_AS(topsis(CriteriaMatrix{}, WeightVector{}), std::invalid_argument);
  CriteriaMatrix one;
  one.add(4, {1, 0.5, 3, 0.1});
  CHECK(topsis(one, WeightVector{})[0] == kDegenerateTopsisScore);
  CriteriaMatrix zeros;
  zeros.add(0, {0, 0, 0, 0});
  zeros.add(1, {0, 0, 0, 0});
  for (double s : topsis(zeros, WeightVector{})) CHECK(s == 0.5);
}

TEST_CASE("topsis argmax is invariant to positive column scaling") {
  Rng rng(61);
  for (int k = 0; k < 2000; ++k) {
    CriteriaMatrix m;
    const std::size_t rows = 2 + rng.index(8);
    for (std::size_t i = 0; i < rows; ++i) {
      m.add(static_cast<ContractorId>(i),
            {rng.uniform(0.1, 10), rng.uniform(), rng.uniform(1, 100), rng.uniform()});
    }
    const WeightVector w = normalize({rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()});
    const auto best = argmax_score(m, topsis(m, w));
    CriteriaMatrix scaled = m;
    const std::size_t col = rng.index(4);
    const double factor = rng.log_uniform(1e-3, 1e3);
    for (auto& r : scaled.rows) r[col] *= factor;
    const auto s = topsis(m, w), s2 = topsis(scaled, w);
    for (std::size_t i = 0; i < rows; ++i) REQUIRE(s[i] == doctest::Approx(s2[i]).epsilon(1e-9));
    CHECK(argmax_score(scaled, s2) == best);
    for (double x : s) REQUIRE((x >= 0 && x <= 1));
  }
}

TEST_CASE("argmax ties go to the lowest id") {
  CriteriaMatrix m;
  m.add(9, {1, 1, 1, 1});
  m.add(3, {1, 1, 1, 1});
  m.add(5, {1, 1, 1, 1});
  const std::vector<double> s = {0.5, 0.5, 0.5};
  CHECK(m.ids[argmax_score(m, s)] == 3);
}

TEST_CASE("confidence clamps at zero") {
  CHECK(decision_confidence({1, 2}, 3.0) == 0.0);
}

TEST_CASE("decide: empty pool goes local") {
  Fixture f;
  f.cfg.epsilon = 0;
  Rng rng(1);
  const auto d = decide(f.ctx(), f.cfg, rng);
  CHECK(d.is_local());
  CHECK(d.reason == DecisionReason::no_candidates);
  CHECK_FALSE(d.chosen_external_cost);
}

TEST_CASE("decide: epsilon 1 explores the only candidate") {
  Fixture f;
  f.cfg.epsilon = 1;
  f.pool.push_back(f.contractor(4, 1, 1e13));
  Rng rng(1);
  const auto d = decide(f.ctx(), f.cfg, rng);
  REQUIRE(d.outsourced_to);
  CHECK(*d.outsourced_to == 4);
  CHECK(d.exploration);
  CHECK(d.confidence == 0.7);
  CHECK(d.topsis_score == 0.5);
}

TEST_CASE("decide: exploration ignores the skill threshold") {
  Fixture f;
  f.cfg.epsilon = 1;
  auto c = f.contractor(2, 1, 1e13);
  c.skills = {"poetry"};
  c.skill_embedding = {0, 1};
  f.pool.push_back(c);
  Rng rng(3);
  CHECK(decide(f.ctx(), f.cfg, rng).outsourced_to == 2u);
}

TEST_CASE("decide: below threshold with epsilon 0 is always local") {
  Fixture f;
  f.cfg.epsilon = 0;
  for (ContractorId i = 0; i < 5; ++i) {
    auto c = f.contractor(i, 0.01, 1e14);
    c.skills = {"poetry"};
    c.skill_embedding = {0, 1};
    f.pool.push_back(c);
  }
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto d = decide(f.ctx(), f.cfg, rng);
    REQUIRE(d.is_local());
    CHECK(d.reason == DecisionReason::no_eligible);
  }
}

// A dominant contractor with a long clean record. Alone it is a degenerate
// one-row TOPSIS (score 0.5 < tau) and stays local; beside a dominated rival
// it scores 1 and the full pipeline outsources to it.
TEST_CASE("decide: dominant candidate end to end") {
  Fixture f;
  f.cfg.epsilon = 0;
  const auto good = f.contractor(1, 0.5, 1e14);
  for (int i = 0; i < 60; ++i) f.history.record_outcome(1, TaskType::risk_assessment, Outcome::success, 0.0);

  f.pool = {good};
  Rng rng(5);
  auto d = decide(f.ctx(), f.cfg, rng);
  CHECK(d.is_local());
  CHECK(d.topsis_score == 0.5);
  CHECK(d.reason == DecisionReason::below_threshold);

  auto bad = f.contractor(2, 3.0, 1e12);
  bad.breach_probs = {0.3};
  bad.channel_security = 0.2;
  bad.dispatch_delay_s = 30;
  f.pool = {bad, good};
  d = decide(f.ctx(), f.cfg, rng);
  REQUIRE(d.outsourced_to);
  CHECK(*d.outsourced_to == 1);
  CHECK_FALSE(d.exploration);
  CHECK(d.reason == DecisionReason::outsource);
  CHECK(d.topsis_score == doctest::Approx(1.0));
  CHECK(d.confidence == 1.0);

  // Hand trace of the accepted external estimate.
  const ReputationRecord rep = f.history.reputation().get(1);
  const double price = 0.5 * (1 + 0.5 * (5 - 5) / 10.0) * f.task.complexity_multiplier;
  const double comm = f.cfg.protocol_overhead_cost;
  const double risk = 10 * (1 - (1 - rep.estimated_failure_prob) * (1 - rep.estimated_security_prob) *
                                    (1 - rep.estimated_quality_prob)) * f.cfg.gamma_impact;
  REQUIRE(d.chosen_external_cost);
  CHECK(d.chosen_external_cost->total() == doctest::Approx(price + comm + risk));
  REQUIRE(d.internal_cost);
  CHECK(d.internal_cost->compute() == doctest::Approx(20.0));
  CHECK(d.chosen_external_cost->total() < d.internal_cost->total());
}

TEST_CASE("decide: reservation price rejects expensive contractors") {
  Fixture f;
  f.cfg.epsilon = 0;
  f.local.hw_cost_per_hour = 0.01;
  const auto good = f.contractor(1, 0.5, 1e14);
  auto bad = f.contractor(2, 3.0, 1e12);
  bad.dispatch_delay_s = 30;
  for (int i = 0; i < 60; ++i) f.history.record_outcome(1, TaskType::risk_assessment, Outcome::success, 0.0);
  f.pool = {good, bad};
  Rng rng(5);
  const auto d = decide(f.ctx(), f.cfg, rng);
  CHECK(d.is_local());
  CHECK(d.reason == DecisionReason::nash_reject);
}

TEST_CASE("decide: infeasible locally with nobody eligible throws") {
  Fixture f;
  f.cfg.epsilon = 0;
  f.local.mem_total_bytes = 1e8;
  CHECK_THROWS_AS(
      [&] {
        Rng rng(1);
        decide(f.ctx(), f.cfg, rng);
      }(),
      NoFeasibleExecutor);
  f.pool = {f.contractor(3, 1, 1e13)};
  Rng rng(1);
  const auto d = decide(f.ctx(), f.cfg, rng);
  CHECK(d.reason == DecisionReason::forced_outsource);
  CHECK(d.outsourced_to == 3u);
}

TEST_CASE("exploration frequency over 10000 decisions") {
  Fixture f;
  f.cfg.epsilon = 0.1;
  f.pool = {f.contractor(1, 1, 1e13), f.contractor(2, 1.2, 1e13)};
  Rng rng(derive_seed(2024, {stream::engine}));
  int explored = 0;
  for (int i = 0; i < 10000; ++i) explored += decide(f.ctx(), f.cfg, rng).exploration ? 1 : 0;
  CHECK(explored >= 900);
  CHECK(explored <= 1100);
}

TEST_CASE("decisions are deterministic for a seed") {
  Fixture f;
  f.cfg.epsilon = 0.3;
  f.pool = {f.contractor(1, 1, 1e13), f.contractor(2, 1.2, 2e13), f.contractor(3, 0.8, 5e12)};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng a(seed), b(seed);
    const auto da = decide(f.ctx(), f.cfg, a);
    const auto db = decide(f.ctx(), f.cfg, b);
    CHECK(to_json(da).dump() == to_json(db).dump());
  }
}

TEST_CASE("history copies keep their own ledger unless shared") {
  EngineConfig cfg;
  DecisionHistory a(cfg);
  a.record_outcome(1, TaskType::generic_compute, Outcome::success, 0);
  DecisionHistory b(a);
  b.record_outcome(1, TaskType::generic_compute, Outcome::failure, 1);
  CHECK(a.reputation().get(1).n_total == 1);
  CHECK(b.reputation().get(1).n_total == 2);

  ReputationLedger shared(cfg);
  DecisionHistory c(cfg, shared), d(cfg, shared);
  c.record_outcome(2, TaskType::generic_compute, Outcome::success, 0);
  CHECK(d.reputation().get(2).n_total == 1);
  CHECK(d.counts(2, TaskType::generic_compute).total == 0);
}

TEST_CASE("historical weights follow an ewma of used weights") {
  EngineConfig cfg;
  DecisionHistory h(cfg);
  h.observe_weights({1, 0, 0, 0});
  CHECK(h.historical_weights().cost == doctest::Approx(0.2 * 1 + 0.8 * 0.25));
  CHECK(checks::on_simplex(h.historical_weights()));
}
