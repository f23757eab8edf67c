#include "coalesce/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coalesce {

namespace {

constexpr std::array<std::string_view, kTaskTypeCount> kTaskTypeNames = {
    "financial_doc_analysis", "risk_assessment", "portfolio_optimization",
    "sentiment_analysis", "generic_compute"};

constexpr std::array<std::string_view, kArchetypeCount> kArchetypeNames = {
    "gpu_specialist", "cpu_optimized", "budget_provider",
    "edge_computing", "cloud_service", "quantum_computing"};

constexpr std::array<std::string_view, kCostComponentCount> kCostComponentNames = {
    "compute", "memory", "energy", "opportunity", "depreciation", "price",
    "communication", "verification", "integration", "risk", "latency_penalty"};

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_unit(std::vector<Violation>& out, const std::string& field, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    out.push_back({field, "must be in [0, 1], got " + fmt_num(v)});
  }
}

void check_positive(std::vector<Violation>& out, const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    out.push_back({field, "must be > 0, got " + fmt_num(v)});
  }
}

void check_non_negative(std::vector<Violation>& out, const std::string& field, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    out.push_back({field, "must be >= 0, got " + fmt_num(v)});
  }
}

bool is_sorted_unique(const SkillSet& s) {
  return std::adjacent_find(s.begin(), s.end(),
                            [](const auto& a, const auto& b) { return !(a < b); }) == s.end();
}

}  // namespace

std::string_view to_string(TaskType t) { return kTaskTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(Archetype a) { return kArchetypeNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(CostComponent c) {
  return kCostComponentNames[static_cast<std::size_t>(c)];
}

std::optional<TaskType> parse_task_type(std::string_view s) {
  for (std::size_t i = 0; i < kTaskTypeNames.size(); ++i) {
    if (kTaskTypeNames[i] == s) return static_cast<TaskType>(i);
  }
  return std::nullopt;
}

std::optional<Archetype> parse_archetype(std::string_view s) {
  for (std::size_t i = 0; i < kArchetypeNames.size(); ++i) {
    if (kArchetypeNames[i] == s) return static_cast<Archetype>(i);
  }
  return std::nullopt;
}

double default_complexity_multiplier(TaskType t) {
  switch (t) {
    case TaskType::generic_compute: return 1.0;
    case TaskType::sentiment_analysis: return 0.8;
    case TaskType::financial_doc_analysis: return 1.2;
    case TaskType::risk_assessment: return 1.3;
    case TaskType::portfolio_optimization: return 1.5;
  }
  return 1.0;
}

double market_pressure_of(double available_supply, double total_supply) {
  if (!(total_supply > 0.0)) return 0.0;
  return std::clamp(1.0 - available_supply / total_supply, 0.0, 1.0);
}

CostBreakdown::CostBreakdown(const Parts& parts) : parts_(parts) {
  double sum = 0.0;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const double v = parts_[i];
    if (!std::isfinite(v) || v < 0.0) {
      throw std::domain_error("cost component '" + std::string(kCostComponentNames[i]) +
                              "' must be finite and >= 0, got " + fmt_num(v));
    }
    sum += v;
  }
  total_ = sum;
}

CostBreakdown CostBreakdown::internal(double compute, double memory, double energy,
                                      double opportunity, double depreciation) {
  Parts p{};
  p[static_cast<std::size_t>(CostComponent::compute)] = compute;
  p[static_cast<std::size_t>(CostComponent::memory)] = memory;
  p[static_cast<std::size_t>(CostComponent::energy)] = energy;
  p[static_cast<std::size_t>(CostComponent::opportunity)] = opportunity;
  p[static_cast<std::size_t>(CostComponent::depreciation)] = depreciation;
  return CostBreakdown(p);
}

CostBreakdown CostBreakdown::external(double price, double communication, double verification,
                                      double integration, double risk, double latency_penalty) {
  Parts p{};
  p[static_cast<std::size_t>(CostComponent::price)] = price;
  p[static_cast<std::size_t>(CostComponent::communication)] = communication;
  p[static_cast<std::size_t>(CostComponent::verification)] = verification;
  p[static_cast<std::size_t>(CostComponent::integration)] = integration;
  p[static_cast<std::size_t>(CostComponent::risk)] = risk;
  p[static_cast<std::size_t>(CostComponent::latency_penalty)] = latency_penalty;
  return CostBreakdown(p);
}

std::string_view to_string(DecisionReason r) {
  switch (r) {
    case DecisionReason::exploration: return "exploration";
    case DecisionReason::outsource: return "outsource";
    case DecisionReason::forced_outsource: return "forced_outsource";
    case DecisionReason::no_candidates: return "no_candidates";
    case DecisionReason::no_eligible: return "no_eligible";
    case DecisionReason::below_threshold: return "below_threshold";
    case DecisionReason::low_confidence: return "low_confidence";
    case DecisionReason::nash_reject: return "nash_reject";
  }
  return "unknown";
}

std::string_view to_string(LifecycleState s) {
  switch (s) {
    case LifecycleState::submitted: return "submitted";
    case LifecycleState::working: return "working";
    case LifecycleState::input_required: return "input_required";
    case LifecycleState::completed: return "completed";
    case LifecycleState::failed: return "failed";
    case LifecycleState::canceled: return "canceled";
  }
  return "unknown";
}

bool is_terminal(LifecycleState s) {
  return s == LifecycleState::completed || s == LifecycleState::failed ||
         s == LifecycleState::canceled;
}

bool is_legal_transition(LifecycleState from, LifecycleState to) {
  using S = LifecycleState;
  switch (from) {
    case S::submitted: return to == S::working;
    case S::working:
      return to == S::input_required || to == S::completed || to == S::failed ||
             to == S::canceled;
    case S::input_required: return to == S::working;
    case S::completed:
    case S::failed:
    case S::canceled: return false;
  }
  return false;
}

IllegalTransition::IllegalTransition(LifecycleState f, LifecycleState t)
    : std::logic_error("illegal lifecycle transition " + std::string(to_string(f)) + " -> " +
                       std::string(to_string(t))),
      from(f),
      to(t) {}

TaskLifecycle::TaskLifecycle(double submitted_at_h) {
  history_.push_back({LifecycleState::submitted, submitted_at_h});
}

void TaskLifecycle::advance(LifecycleState next, double time_h) {
  if (!is_legal_transition(state(), next)) throw IllegalTransition(state(), next);
  history_.push_back({next, time_h});
}

std::vector<Violation> validate(const EngineConfig& c) {
  std::vector<Violation> out;
  check_unit(out, "epsilon", c.epsilon);
  check_unit(out, "theta_skill", c.theta_skill);
  check_unit(out, "tau_threshold", c.tau_threshold);
  check_unit(out, "rho_min", c.rho_min);
  check_non_negative(out, "alpha_corr", c.alpha_corr);
  check_unit(out, "beta_market", c.beta_market);
  check_non_negative(out, "skill_weights.ontological", c.skill_weights.ontological);
  check_non_negative(out, "skill_weights.embedding", c.skill_weights.embedding);
  check_non_negative(out, "skill_weights.performance", c.skill_weights.performance);
  const double sw =
      c.skill_weights.ontological + c.skill_weights.embedding + c.skill_weights.performance;
  if (std::abs(sw - 1.0) > 1e-9) {
    out.push_back({"skill_weights", "must sum to 1, got " + fmt_num(sw)});
  }
  if (!(c.ewma_lambda >= 0.1 && c.ewma_lambda <= 0.3)) {
    out.push_back({"ewma_lambda", "must be in [0.1, 0.3], got " + fmt_num(c.ewma_lambda)});
  }
  check_non_negative(out, "decay_lambda_per_month", c.decay_lambda_per_month);
  check_positive(out, "prior_alpha_success", c.prior_alpha_success);
  check_positive(out, "prior_beta_failure", c.prior_beta_failure);
  check_unit(out, "prior_failure_prob", c.prior_failure_prob);
  check_unit(out, "prior_quality_prob", c.prior_quality_prob);
  check_unit(out, "prior_security_prob", c.prior_security_prob);
  check_non_negative(out, "z_alpha_half", c.z_alpha_half);
  check_non_negative(out, "learning_value_weight", c.learning_value_weight);
  check_non_negative(out, "gamma_impact", c.gamma_impact);
  check_non_negative(out, "protocol_overhead_cost", c.protocol_overhead_cost);
  check_non_negative(out, "verification_cost", c.verification_cost);
  check_non_negative(out, "integration_cost", c.integration_cost);
  if (c.embedding_dim == 0) out.push_back({"embedding_dim", "must be >= 1"});
  return out;
}

std::vector<Violation> validate(const Task& t, std::size_t embedding_dim) {
  std::vector<Violation> out;
  check_positive(out, "task.flops_required", t.flops_required);
  check_non_negative(out, "task.value", t.value);
  check_unit(out, "task.urgency", t.urgency);
  check_unit(out, "task.data_sensitivity", t.data_sensitivity);
  check_positive(out, "task.complexity_multiplier", t.complexity_multiplier);
  check_non_negative(out, "task.input_size_bytes", t.input_size_bytes);
  check_non_negative(out, "task.output_size_bytes", t.output_size_bytes);
  check_non_negative(out, "task.model_memory_bytes", t.model_memory_bytes);
  check_non_negative(out, "task.kv_cache_bytes", t.kv_cache_bytes);
  check_non_negative(out, "task.activation_bytes", t.activation_bytes);
  if (t.requirement_embedding.size() != embedding_dim) {
    out.push_back({"task.requirement_embedding",
                   "dimension " + std::to_string(t.requirement_embedding.size()) +
                       " does not match embedding_dim " + std::to_string(embedding_dim)});
  }
  if (!is_sorted_unique(t.required_skills)) {
    out.push_back({"task.required_skills", "must be sorted and unique"});
  }
  return out;
}

std::vector<Violation> validate(const HardwareSpec& hw, std::string_view prefix) {
  std::vector<Violation> out;
  const std::string p(prefix);
  check_positive(out, p + ".peak_flops", hw.peak_flops);
  check_positive(out, p + ".hw_cost_per_hour", hw.hw_cost_per_hour);
  check_positive(out, p + ".mem_total_bytes", hw.mem_total_bytes);
  check_positive(out, p + ".mem_cost_per_hour", hw.mem_cost_per_hour);
  check_positive(out, p + ".tdp_watts", hw.tdp_watts);
  if (!(hw.utilization_factor > 0.0 && hw.utilization_factor <= 1.0)) {
    out.push_back({p + ".utilization_factor",
                   "must be in (0, 1], got " + fmt_num(hw.utilization_factor)});
  }
  check_positive(out, p + ".kwh_cost", hw.kwh_cost);
  check_positive(out, p + ".bandwidth_bytes_per_s", hw.bandwidth_bytes_per_s);
  check_positive(out, p + ".transfer_cost_per_byte", hw.transfer_cost_per_byte);
  check_positive(out, p + ".depreciation_per_hour", hw.depreciation_per_hour);
  return out;
}

std::vector<Violation> validate(const ContractorProfile& c, std::size_t embedding_dim) {
  std::vector<Violation> out = validate(c.hardware, "contractor.hardware");
  check_positive(out, "contractor.base_price", c.base_price);
  check_unit(out, "contractor.capacity_utilization", c.capacity_utilization);
  check_unit(out, "contractor.channel_security", c.channel_security);
  check_unit(out, "contractor.true_failure_prob", c.true_failure_prob);
  check_unit(out, "contractor.true_quality_degradation_prob", c.true_quality_degradation_prob);
  for (double p : c.breach_probs) check_unit(out, "contractor.breach_probs", p);
  check_non_negative(out, "contractor.dispatch_delay_s", c.dispatch_delay_s);
  if (c.skill_embedding.size() != embedding_dim) {
    out.push_back({"contractor.skill_embedding",
                   "dimension " + std::to_string(c.skill_embedding.size()) +
                       " does not match embedding_dim " + std::to_string(embedding_dim)});
  }
  if (!is_sorted_unique(c.skills)) {
    out.push_back({"contractor.skills", "must be sorted and unique"});
  }
  return out;
}

std::vector<Violation> validate(const MarketState& m) {
  std::vector<Violation> out;
  check_non_negative(out, "market.current_demand", m.current_demand);
  check_non_negative(out, "market.available_supply", m.available_supply);
  check_positive(out, "market.total_supply", m.total_supply);
  if (m.available_supply > m.total_supply) {
    out.push_back({"market.available_supply", "must not exceed total_supply"});
  }
  check_unit(out, "market.market_pressure", m.market_pressure);
  check_unit(out, "market.failure_rate", m.failure_rate);
  return out;
}

}  // namespace coalesce
