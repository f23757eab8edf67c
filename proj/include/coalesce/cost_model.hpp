#pragma once

// Internal (local execution) and external (outsourced) cost equations, plus
// EWMA calibration of cost estimates. Every function here is pure.

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "coalesce/types.hpp"

namespace coalesce {

/// Thrown when a task's memory demand exceeds the local hardware.
class InfeasibleLocal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A task waiting in the local queue; feeds the opportunity cost.
struct QueuedWork {
  double value = 0.0;
  double t_exec_h = 0.0;
};

/// Outcome probabilities the client currently believes for a contractor.
struct RiskEstimates {
  double p_failure = 0.0;
  double p_security = 0.0;
  double p_quality = 0.0;
};

/// Execution time in hours: flops_required / peak_flops.
double execution_hours(const Task& task, const HardwareSpec& hw);

/// t_exec * C_hw_hour with t_exec = FLOPS(T) / P_peak in hours.
double compute_cost(const Task& task, const HardwareSpec& hw);

/// Memory share times hours times hourly memory rate. Throws InfeasibleLocal
/// when the combined demand exceeds hw.mem_total_bytes.
double memory_cost(double model_bytes, double kv_cache_bytes, double activation_bytes,
                   const HardwareSpec& hw, double t_exec_h);

/// kW drawn at the utilization factor, for t_exec hours, at the kWh rate.
double energy_cost(const HardwareSpec& hw, double t_exec_h);

/// Best value-per-hour among queued alternatives times t_exec; 0 when empty.
double opportunity_cost(std::span<const QueuedWork> queue, double t_exec_h);

CostBreakdown internal_cost(const Task& task, const HardwareSpec& hw,
                            std::span<const QueuedWork> queue);

/// Supply-demand price with a floor of 5% of the base price.
double dynamic_price(const ContractorProfile& contractor, const Task& task,
                     const MarketState& market);
inline constexpr double kPriceFloorFraction = 0.05;

/// Per-byte transfer charge plus the protocol overhead.
double communication_cost(const Task& task, const HardwareSpec& hw,
                          double protocol_overhead_cost);

double risk_cost(const Task& task, double p_failure, double p_security, double p_quality,
                 double gamma_impact);

/// Seconds until a result comes back from `contractor`: execution on its
/// hardware, the round-trip transfer, and its dispatch delay.
double estimated_latency_s(const Task& task, const ContractorProfile& contractor);

/// urgency * value * overshoot fraction when the estimate exceeds
/// max_latency_s, 0 otherwise (and when the task has no latency bound).
double latency_penalty(const Task& task, double estimated_latency_s);

CostBreakdown external_cost(const Task& task, const ContractorProfile& contractor,
                            const MarketState& market, const RiskEstimates& risk,
                            const EngineConfig& config);

/// One EWMA-calibrated cost estimate.
struct CalibrationEntry {
  double estimate = 0.0;
  std::size_t sample_count = 0;
  friend bool operator==(const CalibrationEntry&, const CalibrationEntry&) = default;
};

/// estimate <- lambda * actual + (1 - lambda) * estimate. Throws
/// std::domain_error on negative actual cost or lambda outside [0.1, 0.3].
CalibrationEntry ewma_update(const CalibrationEntry& entry, double actual, double lambda);

/// Calibrated estimates keyed by (executor, task type). Executor id
/// kLocalExecutor stands for the client's own hardware.
class CalibrationState {
 public:
  static constexpr std::int64_t kLocalExecutor = -1;
  using Key = std::pair<std::int64_t, TaskType>;

  /// Current entry; when absent, a fresh entry seeded with `model_estimate`.
  CalibrationEntry get_or(Key key, double model_estimate) const;
  bool contains(Key key) const { return entries_.count(key) != 0; }

  /// Applies one EWMA step, seeding with `model_estimate` on first use.
  /// Returns the entry before the update.
  CalibrationEntry update(Key key, double model_estimate, double actual, double lambda);

  const std::map<Key, CalibrationEntry>& entries() const { return entries_; }

 private:
  std::map<Key, CalibrationEntry> entries_;
};

}  // namespace coalesce
