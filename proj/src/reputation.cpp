#include "coalesce/reputation.hpp"

#include <algorithm>
#include <cmath>

namespace coalesce {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::failure: return "failure";
    case Outcome::quality_degraded: return "quality_degraded";
    case Outcome::security_incident: return "security_incident";
  }
  return "unknown";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
  for (Outcome o : {Outcome::success, Outcome::failure, Outcome::quality_degraded,
                    Outcome::security_incident}) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

ReputationRecord ReputationRecord::fresh(ContractorId id, const EngineConfig& config,
                                         double now_h) {
  ReputationRecord r;
  r.contractor_id = id;
  r.last_update_time_h = now_h;
  r.prior_alpha = config.prior_alpha_success;
  r.prior_beta = config.prior_beta_failure;
  r.estimated_failure_prob = config.prior_failure_prob;
  r.estimated_quality_prob = config.prior_quality_prob;
  r.estimated_security_prob = config.prior_security_prob;
  return r;
}

double reliability(const ReputationRecord& r, double now_h, double decay_lambda_per_month) {
  const double posterior = (r.prior_alpha + static_cast<double>(r.n_success)) /
                           (r.prior_alpha + r.prior_beta + static_cast<double>(r.n_total));
  const double idle_months = std::max(0.0, now_h - r.last_update_time_h) / kHoursPerMonth;
  return posterior * std::exp(-decay_lambda_per_month * idle_months);
}

ReputationRecord record_outcome(const ReputationRecord& record, Outcome outcome, double now_h,
                                double ewma_lambda) {
  ReputationRecord r = record;
  ++r.n_total;
  if (outcome == Outcome::success) ++r.n_success;
  auto toward = [ewma_lambda](double est, bool hit) {
    return ewma_lambda * (hit ? 1.0 : 0.0) + (1.0 - ewma_lambda) * est;
  };
  r.estimated_failure_prob = toward(r.estimated_failure_prob, outcome == Outcome::failure);
  r.estimated_quality_prob = toward(r.estimated_quality_prob, outcome == Outcome::quality_degraded);
  r.estimated_security_prob =
      toward(r.estimated_security_prob, outcome == Outcome::security_incident);
  r.last_update_time_h = now_h;
  return r;
}

double security_risk(const ContractorProfile& contractor, const Task& task) {
  double survive = 1.0;
  for (double p : contractor.breach_probs) survive *= (1.0 - p);
  return (1.0 - survive) * task.data_sensitivity * (1.0 - contractor.channel_security);
}

ReputationRecord ReputationLedger::get(ContractorId id) const {
  auto it = records_.find(id);
  if (it != records_.end()) return it->second;
  return ReputationRecord::fresh(id, config_);
}

void ReputationLedger::record(ContractorId id, Outcome outcome, double now_h) {
  records_[id] = record_outcome(get(id), outcome, now_h, config_.ewma_lambda);
}

}  // namespace coalesce
