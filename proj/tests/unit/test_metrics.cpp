#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../common/checks.hpp"
#include "coalesce/metrics.hpp"
#include "coalesce/random.hpp"

using namespace coalesce;

namespace {

LedgerEntry entry(std::optional<double> local, double actual, double local_s, double actual_s,
                  bool outsourced = true) {
  LedgerEntry e;
  if (outsourced) e.decision.outsourced_to = 1;
  e.counterfactual_local_cost = local;
  e.counterfactual_local_latency_s = local_s;
  e.actual_cost = actual;
  e.actual_latency_s = actual_s;
  return e;
}

}  // namespace

TEST_CASE("cost reduction on a hand ledger") {
  // Baseline 50, actual 29.1 -> 41.8%.
  std::vector<LedgerEntry> l = {
      entry(10, 4.0, 100, 80), entry(10, 6.1, 100, 60),  entry(10, 10, 100, 100, false),
      entry(10, 3.0, 100, 70), entry(10, 6.0, 100, 65),
  };
  CHECK(*cost_reduction(l) == doctest::Approx(41.8).epsilon(1e-12));
  CHECK(*time_savings(l) == doctest::Approx(25.0).epsilon(1e-12));

  // Entries without a counterfactual and rejected ones are left out.
  l.push_back(entry(std::nullopt, 1000, 0, 0));
  auto rejected = entry(10, 1000, 100, 1000);
  rejected.rejected = true;
  l.push_back(rejected);
  CHECK(*cost_reduction(l) == doctest::Approx(41.8).epsilon(1e-12));
}

TEST_CASE("all-local ledger reduces nothing") {
  std::vector<LedgerEntry> l = {entry(3, 3, 10, 10, false), entry(5, 5, 20, 20, false)};
  CHECK(*cost_reduction(l) == 0.0);
  CHECK(*time_savings(l) == 0.0);
  const auto m = compute_metrics(l, 10);
  CHECK(m.outsourcing_rate_pct == 0.0);
  CHECK(m.success_rate_pct == 100.0);
  CHECK(m.throughput_tasks_per_hour == doctest::Approx(0.2));
  CHECK_FALSE(m.mean_topsis_score);
}

TEST_CASE("outsourcing that costs more is negative") {
  std::vector<LedgerEntry> l = {entry(2, 3, 10, 10)};
  CHECK(*cost_reduction(l) == doctest::Approx(-50.0));
}

TEST_CASE("empty and zero-baseline ledgers") {
  std::vector<LedgerEntry> none;
  CHECK_FALSE(cost_reduction(none));
  const auto m = compute_metrics(none, 10);
  CHECK(m.n_decisions == 0);
  CHECK(m.throughput_tasks_per_hour == 0.0);
  std::vector<LedgerEntry> zero = {entry(0, 0, 0, 0)};
  CHECK_FALSE(cost_reduction(zero));
  CHECK_FALSE(time_savings(zero));
}

TEST_CASE("rates count decisions") {
  std::vector<LedgerEntry> l;
  for (int i = 0; i < 10; ++i) {
    auto e = entry(1, 1, 1, 1, i < 4);
    e.decision.exploration = i == 0;
    if (i < 4) e.decision.topsis_score = 0.1 * (i + 1);
    if (i == 9) e.final_state = LifecycleState::failed;
    l.push_back(e);
  }
  const auto m = compute_metrics(l, 24);
  CHECK(m.outsourcing_rate_pct == 40.0);
  CHECK(m.exploration_rate_pct == 10.0);
  CHECK(m.success_rate_pct == 90.0);
  CHECK(*m.mean_topsis_score == doctest::Approx(0.25));
  CHECK(m.throughput_tasks_per_hour == doctest::Approx(9.0 / 24));
}

TEST_CASE("metrics do not depend on ledger order") {
  Rng rng(12);
  std::vector<LedgerEntry> l;
  for (int i = 0; i < 200; ++i) {
    auto e = entry(rng.uniform(1, 10), rng.uniform(0, 10), rng.uniform(1, 100),
                   rng.uniform(1, 100), rng.uniform() < 0.6);
    if (!e.decision.is_local()) e.decision.topsis_score = rng.uniform();
    l.push_back(e);
  }
  const auto a = compute_metrics(l, 100);
  std::reverse(l.begin(), l.end());
  const auto b = compute_metrics(l, 100);
  CHECK(*a.cost_reduction_pct == doctest::Approx(*b.cost_reduction_pct).epsilon(1e-12));
  CHECK(*a.time_savings_pct == doctest::Approx(*b.time_savings_pct).epsilon(1e-12));
  CHECK(a.outsourcing_rate_pct == b.outsourcing_rate_pct);
  CHECK(*a.mean_topsis_score == doctest::Approx(*b.mean_topsis_score).epsilon(1e-12));
}

TEST_CASE("pearson matches the oracle") {
  Rng rng(21);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.index(41));
    std::vector<double> x(n), y(n);
    const double slope = rng.uniform(-2, 2);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-100, 100);
      y[i] = slope * x[i] + 30 * rng.normal();
    }
    const auto got = pearson_r(x, y);
    const auto want = checks::oracle_pearson(x, y);
    REQUIRE(got.has_value() == want.has_value());
    if (got) REQUIRE(std::abs(*got - *want) <= 1e-12);
  }
}

TEST_CASE("pearson edge cases") {
  std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> up = {3, 5, 7, 9};
  std::vector<double> down = {8, 6, 4, 2};
  std::vector<double> flat = {1, 1, 1, 1};
  CHECK(*pearson_r(x, up) == doctest::Approx(1.0));
  CHECK(*pearson_r(x, down) == doctest::Approx(-1.0));
  CHECK_FALSE(pearson_r(x, flat));
  std::vector<double> two = {1, 2};
  CHECK_FALSE(pearson_r(two, two));
  std::vector<double> three = {1, 2, 3};
  CHECK_THROWS_AS(pearson_r(x, three), std::invalid_argument);
}

TEST_CASE("correlations wire the right columns") {
  std::vector<RunPoint> pts = {{10, 20, 30}, {20, 40, 20}, {30, 60, 10}};
  const auto c = correlations(pts);
  CHECK(*c.r_outsourcing_costreduction == doctest::Approx(-1.0));
  CHECK(*c.r_agents_costreduction == doctest::Approx(-1.0));
}

TEST_CASE("total variation") {
  std::vector<std::int64_t> a = {-1, -1, 1, 2};
  std::vector<std::int64_t> b = {-1, 1, 1, 1};
  // p = {.5,.25,.25}, q = {.25,.75,0}
  CHECK(total_variation(a, b) == doctest::Approx(0.5));
  CHECK(total_variation(a, a) == 0.0);
  std::vector<std::int64_t> c = {3, 3};
  CHECK(total_variation(a, c) == 1.0);
}

TEST_CASE("convergence diagnostic shape") {
  std::vector<std::int64_t> s(105, -1);
  CHECK(convergence_diagnostic(s, 10).size() == 9);
  CHECK_THROWS_AS(convergence_diagnostic(std::span(s).first(19), 10), std::invalid_argument);
  CHECK_THROWS_AS(convergence_diagnostic(s, 0), std::invalid_argument);
}

TEST_CASE("iid stream has small TV, a regime switch spikes") {
  Rng rng(5);
  std::vector<std::int64_t> s(20000);
  for (auto& x : s) x = static_cast<std::int64_t>(rng.index(4));
  const auto tv = convergence_diagnostic(s, 2000);
  for (double v : tv) CHECK(v < 0.05);

  for (std::size_t i = 10000; i < s.size(); ++i) s[i] = 7;
  const auto sw = convergence_diagnostic(s, 2000);
  CHECK(sw[4] > 0.95);
  CHECK(sw[3] < 0.05);
  CHECK(sw[5] == 0.0);
}

TEST_CASE("choice label") {
  DecisionRecord d;
  CHECK(choice_label(d) == -1);
  d.outsourced_to = 12;
  CHECK(choice_label(d) == 12);
}
