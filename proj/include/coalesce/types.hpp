#pragma once

// Domain types shared by every module: tasks, contractors, market state,
// itemized costs, decision records, task lifecycle and engine configuration.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coalesce {

using ContractorId = std::uint32_t;
using ClientId = std::uint32_t;
using TaskId = std::uint64_t;
using SkillSet = std::vector<std::string>;  // sorted, unique
using Embedding = std::vector<double>;

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kHoursPerMonth = 30.0 * 24.0;

enum class TaskType : std::uint8_t {
  financial_doc_analysis,
  risk_assessment,
  portfolio_optimization,
  sentiment_analysis,
  generic_compute,
};
inline constexpr std::size_t kTaskTypeCount = 5;

enum class Archetype : std::uint8_t {
  gpu_specialist,
  cpu_optimized,
  budget_provider,
  edge_computing,
  cloud_service,
  quantum_computing,
};
inline constexpr std::size_t kArchetypeCount = 6;

std::string_view to_string(TaskType t);
std::string_view to_string(Archetype a);
std::optional<TaskType> parse_task_type(std::string_view s);
std::optional<Archetype> parse_archetype(std::string_view s);

/// Default complexity multiplier per task type.
double default_complexity_multiplier(TaskType t);

struct Task {
  TaskId id = 0;
  ClientId client = 0;
  TaskType task_type = TaskType::generic_compute;
  double arrival_time_h = 0.0;
  double flops_required = 1.0;
  double input_size_bytes = 0.0;
  double output_size_bytes = 0.0;
  double value = 0.0;
  double urgency = 0.0;
  double data_sensitivity = 0.0;
  double complexity_multiplier = 1.0;
  // Working-set memory; scenario-assigned per task.
  double model_memory_bytes = 0.0;
  double kv_cache_bytes = 0.0;
  double activation_bytes = 0.0;
  std::optional<double> max_latency_s;
  std::optional<double> max_budget;
  SkillSet required_skills;
  Embedding requirement_embedding;

  double memory_demand_bytes() const {
    return model_memory_bytes + kv_cache_bytes + activation_bytes;
  }
};

struct HardwareSpec {
  double peak_flops = 1e12;             // FLOP/s
  double hw_cost_per_hour = 1.0;
  double mem_total_bytes = 16e9;
  double mem_cost_per_hour = 0.1;
  double tdp_watts = 300.0;
  double utilization_factor = 0.8;      // (0, 1]
  double kwh_cost = 0.12;
  double bandwidth_bytes_per_s = 1e8;
  double transfer_cost_per_byte = 1e-11;
  double depreciation_per_hour = 0.05;
};

struct ContractorProfile {
  ContractorId id = 0;
  Archetype archetype = Archetype::cloud_service;
  SkillSet skills;
  Embedding skill_embedding;
  HardwareSpec hardware;
  double base_price = 1.0;
  double nominal_base_price = 1.0;  // template price the jitter is applied around
  double demand_sensitivity = 0.5;
  double capacity = 1.0;            // supply units contributed to the market
  double capacity_utilization = 0.8;
  double dispatch_delay_s = 1.0;
  std::vector<double> breach_probs;
  double channel_security = 0.5;
  // Hidden ground truth, used only by the executor.
  double true_failure_prob = 0.0;
  double true_quality_degradation_prob = 0.0;
};

struct MarketState {
  double current_demand = 0.0;
  double base_demand = 0.0;  // demand jitter is applied around this level
  double available_supply = 0.0;
  double total_supply = 1.0;
  double market_pressure = 0.0;
  double failure_rate = 0.0;
  double price_volatility = 0.0;
  double demand_fluctuation = 0.0;
};

/// Derived market-pressure signal: aggregate contractor utilization.
double market_pressure_of(double available_supply, double total_supply);

enum class CostComponent : std::uint8_t {
  compute,
  memory,
  energy,
  opportunity,
  depreciation,
  price,
  communication,
  verification,
  integration,
  risk,
  latency_penalty,
};
inline constexpr std::size_t kCostComponentCount = 11;
std::string_view to_string(CostComponent c);

/// Itemized cost. The total is computed once at construction from the parts,
/// so it always equals the component sum; negative or non-finite components
/// are rejected with std::domain_error.
class CostBreakdown {
 public:
  using Parts = std::array<double, kCostComponentCount>;

  CostBreakdown() = default;
  explicit CostBreakdown(const Parts& parts);

  static CostBreakdown internal(double compute, double memory, double energy, double opportunity,
                                double depreciation);
  static CostBreakdown external(double price, double communication, double verification,
                                double integration, double risk, double latency_penalty);

  double operator[](CostComponent c) const { return parts_[static_cast<std::size_t>(c)]; }
  const Parts& parts() const { return parts_; }
  double total() const { return total_; }

  double compute() const { return (*this)[CostComponent::compute]; }
  double memory() const { return (*this)[CostComponent::memory]; }
  double energy() const { return (*this)[CostComponent::energy]; }
  double opportunity() const { return (*this)[CostComponent::opportunity]; }
  double depreciation() const { return (*this)[CostComponent::depreciation]; }
  double price() const { return (*this)[CostComponent::price]; }
  double communication() const { return (*this)[CostComponent::communication]; }
  double verification() const { return (*this)[CostComponent::verification]; }
  double integration() const { return (*this)[CostComponent::integration]; }
  double risk() const { return (*this)[CostComponent::risk]; }
  double latency_penalty() const { return (*this)[CostComponent::latency_penalty]; }

  friend bool operator==(const CostBreakdown&, const CostBreakdown&) = default;

 private:
  Parts parts_{};
  double total_ = 0.0;
};

struct WeightVector {
  double cost = 0.25;
  double reliability = 0.25;
  double latency = 0.25;
  double security = 0.25;

  std::array<double, 4> as_array() const { return {cost, reliability, latency, security}; }
  static WeightVector from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
  double sum() const { return cost + reliability + latency + security; }
  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

/// Why the engine chose what it chose. Not part of the decision contract, but
/// useful when reading decision logs.
enum class DecisionReason : std::uint8_t {
  exploration,
  outsource,
  forced_outsource,
  no_candidates,
  no_eligible,
  below_threshold,
  low_confidence,
  nash_reject,
};
std::string_view to_string(DecisionReason r);

struct DecisionRecord {
  TaskId task_id = 0;
  ClientId client_id = 0;
  std::optional<ContractorId> outsourced_to;  // empty means LOCAL
  std::optional<double> topsis_score;         // empty when TOPSIS was not run
  double confidence = 0.0;
  bool exploration = false;
  DecisionReason reason = DecisionReason::no_candidates;
  std::optional<CostBreakdown> internal_cost;  // empty when infeasible locally
  std::optional<CostBreakdown> chosen_external_cost;
  WeightVector weights_used;
  std::size_t eligible_count = 0;
  std::optional<double> exploration_value;

  bool is_local() const { return !outsourced_to.has_value(); }
};

enum class LifecycleState : std::uint8_t {
  submitted,
  working,
  input_required,
  completed,
  failed,
  canceled,
};
std::string_view to_string(LifecycleState s);
bool is_terminal(LifecycleState s);
bool is_legal_transition(LifecycleState from, LifecycleState to);

class IllegalTransition : public std::logic_error {
 public:
  IllegalTransition(LifecycleState from, LifecycleState to);
  LifecycleState from;
  LifecycleState to;
};

/// Task lifecycle state machine:
/// submitted -> working -> (input_required -> working)* -> completed|failed|canceled.
class TaskLifecycle {
 public:
  struct Transition {
    LifecycleState state;
    double time_h;
  };

  explicit TaskLifecycle(double submitted_at_h = 0.0);

  /// Throws IllegalTransition and leaves the state unchanged on illegal moves.
  void advance(LifecycleState next, double time_h);

  LifecycleState state() const { return history_.back().state; }
  const std::vector<Transition>& history() const { return history_; }

 private:
  std::vector<Transition> history_;
};

struct SkillWeights {
  double ontological = 0.3;
  double embedding = 0.5;
  double performance = 0.2;
};

struct EngineConfig {
  double epsilon = 0.1;
  double theta_skill = 0.7;
  double tau_threshold = 0.6;
  double rho_min = 0.8;
  double alpha_corr = 0.3;
  double beta_market = 0.7;
  SkillWeights skill_weights;
  double ewma_lambda = 0.2;
  double decay_lambda_per_month = 0.1;
  double prior_alpha_success = 1.0;
  double prior_beta_failure = 1.0;
  // Starting values of the EWMA-tracked outcome probabilities for a contractor
  // the client has never used.
  double prior_failure_prob = 0.5;
  double prior_quality_prob = 0.1;
  double prior_security_prob = 0.05;
  double z_alpha_half = 1.96;
  double learning_value_weight = 0.0;
  double gamma_impact = 1.0;
  double protocol_overhead_cost = 0.001;
  double verification_cost = 0.0;
  double integration_cost = 0.0;
  std::size_t embedding_dim = 16;
};

struct Violation {
  std::string field;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Returns every violated bound; empty when the configuration is valid.
std::vector<Violation> validate(const EngineConfig& config);

/// Field-level checks on individual records. Used when loading scenarios so
/// dimension mismatches are caught before any decision is made.
std::vector<Violation> validate(const Task& task, std::size_t embedding_dim);
std::vector<Violation> validate(const HardwareSpec& hw, std::string_view prefix = "hardware");
std::vector<Violation> validate(const ContractorProfile& c, std::size_t embedding_dim);
std::vector<Violation> validate(const MarketState& m);

}  // namespace coalesce
