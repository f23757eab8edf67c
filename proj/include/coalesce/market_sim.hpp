#pragma once

// Scenario description, population and task generation, market dynamics and
// ground-truth task execution.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coalesce/cost_model.hpp"
#include "coalesce/random.hpp"
#include "coalesce/reputation.hpp"
#include "coalesce/types.hpp"

namespace coalesce {

struct VolatilityBands {
  double capacity_lo = 0.6;
  double capacity_hi = 1.0;
  double demand_jitter = 0.25;  // demand = base * U[1 - j, 1 + j]
  double price_jitter = 0.10;   // base price = nominal * U[1 - j, 1 + j]
  friend bool operator==(const VolatilityBands&, const VolatilityBands&) = default;
};

struct ArchetypeTemplate {
  HardwareSpec hardware;
  double hardware_spread = 0.2;  // peak_flops scaled by U[1 - s, 1 + s]
  double base_price = 1.0;       // per task, before market adjustment
  double price_spread = 0.2;
  double demand_sensitivity = 0.5;
  double capacity = 1.0;
  double dispatch_delay_s = 2.0;
  SkillSet skills;
  // Mixing weights over task-type centroids that place the skill embedding.
  std::array<double, kTaskTypeCount> affinity{};
  double embedding_noise = 0.3;
  std::vector<double> breach_probs;
  double channel_security = 0.5;
  double failure_prob_lo = 0.0;
  double failure_prob_hi = 0.1;
  double quality_prob_lo = 0.0;
  double quality_prob_hi = 0.05;
};

struct TaskTemplate {
  double weight = 1.0;  // relative frequency in the arrival mix
  SkillSet required_skills;
  double flops_lo = 1e14;  // log-uniform
  double flops_hi = 1e15;
  double input_bytes_lo = 1e6;
  double input_bytes_hi = 1e8;
  double output_bytes_lo = 1e5;
  double output_bytes_hi = 1e7;
  // Task value per 1e15 FLOPs of work, so value per hour of compute does not
  // depend on task size.
  double value_per_pflop_lo = 1.0;
  double value_per_pflop_hi = 5.0;
  double urgency_lo = 0.0;
  double urgency_hi = 1.0;
  double sensitivity_lo = 0.0;
  double sensitivity_hi = 1.0;
  double complexity_multiplier = 1.0;
  double model_memory_bytes = 4e9;
  double kv_cache_bytes = 1e9;
  double activation_bytes = 1e9;
  std::optional<double> max_latency_s;
  double embedding_noise = 0.2;
};

enum class HistorySharing : std::uint8_t { none, reputation, full };
std::string_view to_string(HistorySharing h);
std::optional<HistorySharing> parse_history_sharing(std::string_view s);

struct ScenarioConfig {
  std::string name = "default";
  std::uint32_t n_clients = 15;
  std::uint32_t n_contractors = 30;
  double duration_days = 7.0;
  double arrival_rate_per_hour = 2.5;
  std::array<double, kArchetypeCount> archetype_mix{};
  VolatilityBands volatility;
  std::uint64_t seed = 42;

  EngineConfig engine;
  std::array<ArchetypeTemplate, kArchetypeCount> archetypes{};
  std::array<TaskTemplate, kTaskTypeCount> task_types{};
  HardwareSpec client_hardware;
  double client_hardware_spread = 0.1;

  double market_step_h = 1.0;
  double demand_ratio = 0.3;          // base demand as a fraction of total supply
  double initial_failure_rate = 0.05;
  double execution_noise_sigma = 0.1;  // lognormal sigma on billed cost and latency
  double input_required_prob = 0.05;   // contractor asks for more input once
  double input_round_trip_s = 30.0;
  // Discovery/negotiation messaging per outsourced task, per contractor in
  // the market. Added to the protocol overhead.
  double coordination_cost_per_peer = 0.0;
  // Hidden quality-degradation probability added when a contractor works
  // outside its specialty: penalty * (share of the required skills it lacks).
  double skill_mismatch_quality_penalty = 0.0;
  // Cosine similarity between any two task-type centroids: how much the
  // task types share one application domain.
  double shared_domain_similarity = 0.0;
  // What clients pool through a public market ledger: nothing, only the
  // reputation ledger, or the whole decision history (outcome counts,
  // reputation, weights, calibration).
  HistorySharing history_sharing = HistorySharing::none;
};

/// Scenario-level violations, including the embedded engine configuration.
std::vector<Violation> validate(const ScenarioConfig& scenario);

/// Fixed unit centroid per task type (the skill ontology); independent of any
/// scenario seed. When the dimension allows it, every pair of centroids has
/// cosine similarity exactly `shared` (a common domain direction plus one
/// orthogonal direction per type).
std::array<Embedding, kTaskTypeCount> task_type_centroids(std::size_t dim, double shared = 0.0);

struct ClientProfile {
  ClientId id = 0;
  HardwareSpec hardware;
};

struct Population {
  std::vector<ClientProfile> clients;
  std::vector<ContractorProfile> contractors;
};

Population generate_population(const ScenarioConfig& scenario, Rng& rng);

/// Merged, arrival-ordered task stream for every client over the scenario
/// duration. Task ids are assigned in stream order.
std::vector<Task> generate_tasks(const ScenarioConfig& scenario, Rng& rng);

/// Market at time zero for a population.
MarketState initial_market(const ScenarioConfig& scenario,
                           std::span<const ContractorProfile> contractors);

/// Redraws demand around its base level, each contractor's utilization and
/// price jitter, then recomputes supply and pressure. Always consumes
/// 1 + 2 * contractors.size() variates.
MarketState step_market(const MarketState& market, std::vector<ContractorProfile>& contractors,
                        const VolatilityBands& bands, Rng& rng);

struct LocalExecutor {
  const HardwareSpec* hardware = nullptr;
  CostBreakdown internal;    // snapshotted at decision time
  double queue_wait_s = 0.0;
};

struct ContractorExecutor {
  const ContractorProfile* contractor = nullptr;
  CostBreakdown external;  // estimate at decision time
};

using Executor = std::variant<LocalExecutor, ContractorExecutor>;

struct ExecutionOptions {
  double noise_sigma = 0.1;
  double input_required_prob = 0.0;
  double input_round_trip_s = 30.0;
  double gamma_impact = 1.0;
  double skill_mismatch_quality_penalty = 0.0;
};

struct ExecutionOutcome {
  double actual_cost = 0.0;
  double billed_cost = 0.0;  // contractor charges only, without realized losses
  double actual_latency_s = 0.0;
  Outcome result = Outcome::success;
  TaskLifecycle lifecycle;
};

/// Hidden probability that `c` degrades `task`'s result.
/// Fraction of `required` present in `have` (1 when nothing is required).
double skill_coverage(const SkillSet& have, const SkillSet& required);
double true_quality_prob(const ContractorProfile& c, const Task& task, double mismatch_penalty);

/// Billable part of an external estimate: price, communication,
/// verification and integration. Risk and latency penalty are expectations,
/// not charges.
double billable(const CostBreakdown& external);

/// Runs a task on an executor against hidden ground truth.
/// Local execution is deterministic: the client knows its own hardware, so
/// cost equals the decision-time internal cost and the result is success.
/// Contractor execution bills the estimate times lognormal noise, draws the
/// result from the contractor's true probabilities (quality degradation raised
/// by the skill-mismatch penalty), and adds realized losses
/// (task value times impact) for quality or security incidents plus any
/// realized latency penalty. Throws std::invalid_argument if the executor
/// cannot host the task.
ExecutionOutcome execute_task(const Task& task, const Executor& executor, double start_h,
                              const ExecutionOptions& options, Rng& rng);

}  // namespace coalesce
