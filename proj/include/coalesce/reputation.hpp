#pragma once

#include <map>
#include <optional>

#include "coalesce/cost_model.hpp"
#include "coalesce/types.hpp"

namespace coalesce {

enum class Outcome : std::uint8_t { success, failure, quality_degraded, security_incident };
std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);

struct ReputationRecord {
  ContractorId contractor_id = 0;
  std::uint64_t n_success = 0;
  std::uint64_t n_total = 0;
  double last_update_time_h = 0.0;
  double prior_alpha = 1.0;
  double prior_beta = 1.0;
  double estimated_failure_prob = 0.5;
  double estimated_quality_prob = 0.1;
  double estimated_security_prob = 0.05;

  /// Record for a contractor with no interactions, using the engine priors.
  static ReputationRecord fresh(ContractorId id, const EngineConfig& config, double now_h = 0.0);

  RiskEstimates risk_estimates() const {
    return {estimated_failure_prob, estimated_security_prob, estimated_quality_prob};
  }
  friend bool operator==(const ReputationRecord&, const ReputationRecord&) = default;
};

/// Beta posterior mean of success, decayed by exp(-lambda * idle months).
/// `now_h` earlier than the last update is treated as zero idle time.
double reliability(const ReputationRecord& record, double now_h,
                   double decay_lambda_per_month = 0.1);

/// Counts the outcome and moves the three EWMA-tracked probabilities toward
/// the observed indicators.
ReputationRecord record_outcome(const ReputationRecord& record, Outcome outcome, double now_h,
                                double ewma_lambda);

/// Combined breach probability over attack vectors, scaled by the task's data
/// sensitivity and by the channel's exposure (1 - channel_security).
double security_risk(const ContractorProfile& contractor, const Task& task);

/// A client's private view of contractor reputations. Contractors without a
/// record are reported with fresh priors.
class ReputationLedger {
 public:
  explicit ReputationLedger(const EngineConfig& config) : config_(config) {}

  ReputationRecord get(ContractorId id) const;
  void record(ContractorId id, Outcome outcome, double now_h);
  const std::map<ContractorId, ReputationRecord>& records() const { return records_; }

 private:
  EngineConfig config_;
  std::map<ContractorId, ReputationRecord> records_;
};

}  // namespace coalesce
