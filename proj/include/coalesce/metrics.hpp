#pragma once

// Run-level aggregates over a decision ledger, cross-run correlations and the
// windowed convergence diagnostic.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "coalesce/reputation.hpp"
#include "coalesce/types.hpp"

namespace coalesce {

/// One decided task: the decision plus what actually happened.
struct LedgerEntry {
  DecisionRecord decision;
  TaskType task_type = TaskType::generic_compute;
  double arrival_h = 0.0;
  double completion_h = 0.0;
  // Counterfactual local execution, snapshotted at decision time. Empty when
  // the task could not run locally.
  std::optional<double> counterfactual_local_cost;
  double counterfactual_local_latency_s = 0.0;
  double actual_cost = 0.0;
  double actual_latency_s = 0.0;
  Outcome result = Outcome::success;
  LifecycleState final_state = LifecycleState::completed;
  bool retried_locally = false;
  bool rejected = false;  // no feasible executor at all
};

struct RunMetrics {
  std::optional<double> cost_reduction_pct;
  std::optional<double> time_savings_pct;
  double outsourcing_rate_pct = 0.0;
  double exploration_rate_pct = 0.0;
  std::optional<double> mean_topsis_score;
  double throughput_tasks_per_hour = 0.0;
  double success_rate_pct = 0.0;
  std::uint64_t n_decisions = 0;
  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// 100 * (sum counterfactual - sum actual) / sum counterfactual over entries
/// with a counterfactual. Empty when the denominator is zero.
std::optional<double> cost_reduction(std::span<const LedgerEntry> ledger);

/// Same shape as cost_reduction, over latencies.
std::optional<double> time_savings(std::span<const LedgerEntry> ledger);

RunMetrics compute_metrics(std::span<const LedgerEntry> ledger, double duration_h);

/// Textbook Pearson r; empty with fewer than 3 pairs or zero variance.
std::optional<double> pearson_r(std::span<const double> x, std::span<const double> y);

struct RunPoint {
  double agent_count = 0.0;
  double outsourcing_rate_pct = 0.0;
  double cost_reduction_pct = 0.0;
};

struct EconomicCorrelations {
  std::optional<double> r_outsourcing_costreduction;
  std::optional<double> r_agents_costreduction;
};

EconomicCorrelations correlations(std::span<const RunPoint> runs);

/// Choice label for the convergence diagnostic: -1 for LOCAL, contractor id
/// otherwise.
std::int64_t choice_label(const DecisionRecord& d);

/// Total-variation distance between the empirical choice distributions of
/// consecutive non-overlapping windows. Returns floor(n / window) - 1 values.
/// Throws std::invalid_argument when the stream is shorter than two windows.
std::vector<double> convergence_diagnostic(std::span<const std::int64_t> choices,
                                           std::size_t window);

/// Half the L1 distance between the empirical distributions of two samples.
double total_variation(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

}  // namespace coalesce
