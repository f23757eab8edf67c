#include "coalesce/cost_model.hpp"

#include <algorithm>
#include <cmath>

namespace coalesce {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string(what) + " must be finite");
}

}  // namespace

double execution_hours(const Task& task, const HardwareSpec& hw) {
  require_finite(task.flops_required, "flops_required");
  require_finite(hw.peak_flops, "peak_flops");
  if (!(hw.peak_flops > 0.0)) throw std::domain_error("peak_flops must be > 0");
  return task.flops_required / hw.peak_flops / kSecondsPerHour;
}

double compute_cost(const Task& task, const HardwareSpec& hw) {
  require_finite(hw.hw_cost_per_hour, "hw_cost_per_hour");
  return execution_hours(task, hw) * hw.hw_cost_per_hour;
}

double memory_cost(double model_bytes, double kv_cache_bytes, double activation_bytes,
                   const HardwareSpec& hw, double t_exec_h) {
  const double demand = model_bytes + kv_cache_bytes + activation_bytes;
  require_finite(demand, "memory demand");
  require_finite(t_exec_h, "t_exec");
  if (demand > hw.mem_total_bytes) {
    throw InfeasibleLocal("memory demand " + std::to_string(demand) + " B exceeds " +
                          std::to_string(hw.mem_total_bytes) + " B available");
  }
  return (demand / hw.mem_total_bytes) * t_exec_h * hw.mem_cost_per_hour;
}

double energy_cost(const HardwareSpec& hw, double t_exec_h) {
  require_finite(t_exec_h, "t_exec");
  if (t_exec_h < 0.0) throw std::domain_error("t_exec must be >= 0");
  return (hw.tdp_watts / 1000.0) * hw.utilization_factor * t_exec_h * hw.kwh_cost;
}

double opportunity_cost(std::span<const QueuedWork> queue, double t_exec_h) {
  double best_rate = 0.0;
  for (const auto& q : queue) {
    if (q.t_exec_h > 0.0) best_rate = std::max(best_rate, q.value / q.t_exec_h);
  }
  return best_rate * t_exec_h;
}

CostBreakdown internal_cost(const Task& task, const HardwareSpec& hw,
                            std::span<const QueuedWork> queue) {
  const double t = execution_hours(task, hw);
  const double memory =
      memory_cost(task.model_memory_bytes, task.kv_cache_bytes, task.activation_bytes, hw, t);
  return CostBreakdown::internal(t * hw.hw_cost_per_hour, memory, energy_cost(hw, t),
                                 opportunity_cost(queue, t), hw.depreciation_per_hour * t);
}

double dynamic_price(const ContractorProfile& contractor, const Task& task,
                     const MarketState& market) {
  if (!(market.total_supply > 0.0)) throw std::domain_error("total_supply must be > 0");
  const double pressure =
      (market.current_demand - market.available_supply) / market.total_supply;
  const double factor = 1.0 + contractor.demand_sensitivity * pressure;
  const double price = contractor.base_price * factor * task.complexity_multiplier;
  return std::max(price, kPriceFloorFraction * contractor.base_price);
}

double communication_cost(const Task& task, const HardwareSpec& hw,
                          double protocol_overhead_cost) {
  // (bytes / bandwidth) seconds at a transfer rate of cost_per_byte * bandwidth.
  const double bytes = task.input_size_bytes + task.output_size_bytes;
  const double transfer_rate = hw.transfer_cost_per_byte * hw.bandwidth_bytes_per_s;
  return (bytes / hw.bandwidth_bytes_per_s) * transfer_rate + protocol_overhead_cost;
}

double risk_cost(const Task& task, double p_failure, double p_security, double p_quality,
                 double gamma_impact) {
  const double survive = (1.0 - p_failure) * (1.0 - p_security) * (1.0 - p_quality);
  return task.value * (1.0 - survive) * gamma_impact;
}

double estimated_latency_s(const Task& task, const ContractorProfile& contractor) {
  const double exec_s = execution_hours(task, contractor.hardware) * kSecondsPerHour;
  const double transfer_s = (task.input_size_bytes + task.output_size_bytes) /
                            contractor.hardware.bandwidth_bytes_per_s;
  return exec_s + transfer_s + contractor.dispatch_delay_s;
}

double latency_penalty(const Task& task, double estimated_s) {
  if (!task.max_latency_s || estimated_s <= *task.max_latency_s) return 0.0;
  const double overshoot = (estimated_s - *task.max_latency_s) / *task.max_latency_s;
  return task.urgency * task.value * overshoot;
}

CostBreakdown external_cost(const Task& task, const ContractorProfile& contractor,
                            const MarketState& market, const RiskEstimates& risk,
                            const EngineConfig& config) {
  return CostBreakdown::external(
      dynamic_price(contractor, task, market),
      communication_cost(task, contractor.hardware, config.protocol_overhead_cost),
      config.verification_cost, config.integration_cost,
      risk_cost(task, risk.p_failure, risk.p_security, risk.p_quality, config.gamma_impact),
      latency_penalty(task, estimated_latency_s(task, contractor)));
}

CalibrationEntry ewma_update(const CalibrationEntry& entry, double actual, double lambda) {
  if (!(actual >= 0.0) || !std::isfinite(actual)) {
    throw std::domain_error("actual cost must be finite and >= 0");
  }
  if (!(lambda >= 0.1 && lambda <= 0.3)) {
    throw std::domain_error("ewma lambda must be in [0.1, 0.3]");
  }
  return {lambda * actual + (1.0 - lambda) * entry.estimate, entry.sample_count + 1};
}

CalibrationEntry CalibrationState::get_or(Key key, double model_estimate) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return {model_estimate, 0};
  return it->second;
}

CalibrationEntry CalibrationState::update(Key key, double model_estimate, double actual,
                                          double lambda) {
  const CalibrationEntry before = get_or(key, model_estimate);
  entries_[key] = ewma_update(before, actual, lambda);
  return before;
}

}  // namespace coalesce
