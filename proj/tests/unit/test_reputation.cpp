#include <doctest.h>

#include <cmath>

#include "../common/checks.hpp"
#include "coalesce/reputation.hpp"

using namespace coalesce;

TEST_CASE("fresh records use the engine priors") {
  EngineConfig cfg;
  cfg.prior_alpha_success = 2;
  cfg.prior_beta_failure = 3;
  cfg.prior_failure_prob = 0.4;
  const auto r = ReputationRecord::fresh(7, cfg, 12.0);
  CHECK(r.contractor_id == 7);
  CHECK(r.prior_alpha == 2);
  CHECK(r.prior_beta == 3);
  CHECK(r.estimated_failure_prob == 0.4);
  CHECK(r.last_update_time_h == 12.0);
  CHECK(reliability(r, 12.0) == doctest::Approx(0.4));
}

TEST_CASE("reliability properties on random records") {
  CHECK(checks::reliability_violations(10000, 31) == 0);
}

TEST_CASE("time before the last update is zero idle time") {
  ReputationRecord r;
  r.last_update_time_h = 100;
  CHECK(reliability(r, 50) == reliability(r, 100));
}

TEST_CASE("outcome estimates move toward the indicator") {
  ReputationRecord r;
  r.estimated_failure_prob = 0.5;
  r.estimated_quality_prob = 0.1;
  r.estimated_security_prob = 0.05;
  const auto f = record_outcome(r, Outcome::failure, 1, 0.2);
  CHECK(f.estimated_failure_prob == doctest::Approx(0.6));
  CHECK(f.estimated_quality_prob == doctest::Approx(0.08));
  const auto q = record_outcome(r, Outcome::quality_degraded, 1, 0.2);
  CHECK(q.estimated_quality_prob == doctest::Approx(0.28));
  CHECK(q.n_success == 0);
  const auto s = record_outcome(r, Outcome::security_incident, 3, 0.2);
  CHECK(s.estimated_security_prob == doctest::Approx(0.24));
  CHECK(s.last_update_time_h == 3);
}

// The EWMA estimate of a Bernoulli(p) stream has stationary variance
// lambda / (2 - lambda) * p (1 - p); it is not a sample mean, so its error
// does not shrink with N. Check the time-average against the binomial 3-sigma
// band at N = 2000 and the final value against the EWMA band.
TEST_CASE("failure estimate is consistent with the true probability") {
  const double lambda = 0.2;
  for (double p : {0.05, 0.2, 0.5}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed * 977 + static_cast<std::uint64_t>(p * 1000));
      ReputationRecord r;
      const int n = 2000;
      double avg = 0;
      for (int i = 0; i < n; ++i) {
        r = record_outcome(r, rng.bernoulli(p) ? Outcome::failure : Outcome::success, i, lambda);
        avg += r.estimated_failure_prob;
      }
      avg /= n;
      const double binom = std::sqrt(p * (1 - p) / n);
      CHECK(std::abs(avg - p) <= 3 * binom + 0.5 / n / lambda);
      const double ewma_sd = std::sqrt(lambda / (2 - lambda) * p * (1 - p));
      CHECK(std::abs(r.estimated_failure_prob - p) <= 3 * ewma_sd);
      const double freq = 1.0 - static_cast<double>(r.n_success) / r.n_total;
      CHECK(std::abs(freq - p) <= 3 * binom);
    }
  }
}

TEST_CASE("security risk bounds and monotonicity") {
  Rng rng(5);
  for (int k = 0; k < 10000; ++k) {
    ContractorProfile c;
    for (std::size_t i = rng.index(5); i > 0; --i) c.breach_probs.push_back(rng.uniform());
    c.channel_security = rng.uniform();
    Task t = checks::plain_task();
    t.data_sensitivity = rng.uniform();
    const double s = security_risk(c, t);
    REQUIRE(s >= 0);
    REQUIRE(s <= 1);
    c.breach_probs.push_back(rng.uniform());
    REQUIRE(security_risk(c, t) >= s);
  }
}

TEST_CASE("higher channel security lowers risk") {
  ContractorProfile c;
  c.breach_probs = {0.2};
  Task t = checks::plain_task();
  t.data_sensitivity = 1;
  c.channel_security = 0.2;
  const double open = security_risk(c, t);
  c.channel_security = 0.9;
  CHECK(security_risk(c, t) < open);
}

TEST_CASE("ledger reports fresh priors for unknown contractors") {
  EngineConfig cfg;
  ReputationLedger ledger(cfg);
  CHECK(ledger.get(3) == ReputationRecord::fresh(3, cfg));
  ledger.record(3, Outcome::success, 2.0);
  ledger.record(3, Outcome::failure, 4.0);
  const auto r = ledger.get(3);
  CHECK(r.n_total == 2);
  CHECK(r.n_success == 1);
  CHECK(r.last_update_time_h == 4.0);
  CHECK(ledger.records().size() == 1);
}

TEST_CASE("outcome names round-trip") {
  for (auto o : {Outcome::success, Outcome::failure, Outcome::quality_degraded,
                 Outcome::security_incident}) {
    CHECK(parse_outcome(to_string(o)) == o);
  }
}
