#include "coalesce/presets.hpp"

#include <array>
#include <cstdio>

namespace coalesce {

namespace {

constexpr std::size_t idx(Archetype a) { return static_cast<std::size_t>(a); }
constexpr std::size_t idx(TaskType t) { return static_cast<std::size_t>(t); }

// affinity order: financial_doc, risk, portfolio, sentiment, generic
std::array<ArchetypeTemplate, kArchetypeCount> default_archetypes() {
  std::array<ArchetypeTemplate, kArchetypeCount> a{};

  auto& gpu = a[idx(Archetype::gpu_specialist)];
  gpu.hardware = {2.0e13, 6.0, 80e9, 0.4, 700.0, 0.9, 0.12, 1.0e9, 1e-11, 0.5};
  gpu.base_price = 0.6;
  gpu.demand_sensitivity = 0.8;
  gpu.dispatch_delay_s = 2.0;
  gpu.skills = {"finance", "optimization", "risk", "statistics"};
  gpu.affinity = {0.0, 0.8, 1.0, 0.0, 0.0};
  gpu.breach_probs = {0.01, 0.02};
  gpu.channel_security = 0.8;
  gpu.failure_prob_lo = 0.01;
  gpu.failure_prob_hi = 0.05;
  gpu.quality_prob_lo = 0.0;
  gpu.quality_prob_hi = 0.03;

  auto& cpu = a[idx(Archetype::cpu_optimized)];
  cpu.hardware = {6.0e12, 2.0, 64e9, 0.2, 250.0, 0.8, 0.12, 5.0e8, 1e-11, 0.2};
  cpu.base_price = 0.4;
  cpu.demand_sensitivity = 0.5;
  cpu.dispatch_delay_s = 1.5;
  cpu.skills = {"document", "finance", "nlp", "risk", "statistics"};
  cpu.affinity = {1.0, 1.0, 0.0, 0.0, 0.0};
  cpu.breach_probs = {0.02, 0.02};
  cpu.channel_security = 0.7;
  cpu.failure_prob_lo = 0.02;
  cpu.failure_prob_hi = 0.06;
  cpu.quality_prob_lo = 0.0;
  cpu.quality_prob_hi = 0.04;

  auto& budget = a[idx(Archetype::budget_provider)];
  budget.hardware = {3.0e12, 0.6, 32e9, 0.05, 200.0, 0.8, 0.10, 2.0e8, 2e-11, 0.05};
  budget.base_price = 0.3;
  budget.price_spread = 0.3;
  budget.demand_sensitivity = 0.3;
  budget.dispatch_delay_s = 4.0;
  budget.skills = {"compute", "nlp", "text"};
  budget.affinity = {0.0, 0.0, 0.0, 0.6, 1.0};
  budget.breach_probs = {0.05, 0.05, 0.05};
  budget.channel_security = 0.4;
  budget.failure_prob_lo = 0.05;
  budget.failure_prob_hi = 0.20;
  budget.quality_prob_lo = 0.02;
  budget.quality_prob_hi = 0.10;

  auto& edge = a[idx(Archetype::edge_computing)];
  edge.hardware = {2.5e12, 1.0, 16e9, 0.1, 60.0, 0.7, 0.15, 1.0e9, 1e-11, 0.1};
  edge.base_price = 0.15;
  edge.demand_sensitivity = 0.6;
  edge.dispatch_delay_s = 0.2;
  edge.skills = {"compute", "nlp", "text"};
  edge.affinity = {0.0, 0.0, 0.0, 1.0, 0.6};
  edge.breach_probs = {0.03, 0.03};
  edge.channel_security = 0.5;
  edge.failure_prob_lo = 0.02;
  edge.failure_prob_hi = 0.08;
  edge.quality_prob_lo = 0.01;
  edge.quality_prob_hi = 0.05;

  auto& cloud = a[idx(Archetype::cloud_service)];
  cloud.hardware = {1.0e13, 3.0, 128e9, 0.3, 400.0, 0.8, 0.12, 1.0e9, 1e-11, 0.3};
  cloud.base_price = 0.5;
  cloud.demand_sensitivity = 0.4;
  cloud.capacity = 3.0;
  cloud.dispatch_delay_s = 3.0;
  cloud.skills = {"compute", "document", "finance", "nlp"};
  cloud.affinity = {1.0, 0.0, 0.0, 0.0, 1.0};
  cloud.breach_probs = {0.01, 0.01, 0.01};
  cloud.channel_security = 0.9;
  cloud.failure_prob_lo = 0.01;
  cloud.failure_prob_hi = 0.04;
  cloud.quality_prob_lo = 0.0;
  cloud.quality_prob_hi = 0.03;

  auto& quantum = a[idx(Archetype::quantum_computing)];
  quantum.hardware = {1.5e13, 12.0, 64e9, 0.5, 1500.0, 0.6, 0.15, 5.0e8, 2e-11, 1.0};
  quantum.base_price = 0.8;
  quantum.demand_sensitivity = 1.0;
  quantum.dispatch_delay_s = 10.0;
  quantum.skills = {"finance", "optimization", "quantum"};
  quantum.affinity = {0.0, 0.3, 1.0, 0.0, 0.0};
  quantum.breach_probs = {0.02};
  quantum.channel_security = 0.8;
  quantum.failure_prob_lo = 0.03;
  quantum.failure_prob_hi = 0.12;
  quantum.quality_prob_lo = 0.02;
  quantum.quality_prob_hi = 0.08;
  return a;
}

std::array<TaskTemplate, kTaskTypeCount> default_task_types() {
  std::array<TaskTemplate, kTaskTypeCount> t{};

  auto& fin = t[idx(TaskType::financial_doc_analysis)];
  fin.weight = 0.25;
  fin.required_skills = {"document", "finance", "nlp"};
  fin.flops_lo = 3e13;
  fin.flops_hi = 3e15;
  fin.sensitivity_lo = 0.3;
  fin.sensitivity_hi = 0.9;
  fin.complexity_multiplier = default_complexity_multiplier(TaskType::financial_doc_analysis);
  fin.max_latency_s = 3600.0;

  auto& risk = t[idx(TaskType::risk_assessment)];
  risk.weight = 0.2;
  risk.required_skills = {"finance", "risk", "statistics"};
  risk.flops_lo = 5e13;
  risk.flops_hi = 5e15;
  risk.sensitivity_lo = 0.4;
  risk.sensitivity_hi = 1.0;
  risk.complexity_multiplier = default_complexity_multiplier(TaskType::risk_assessment);

  auto& port = t[idx(TaskType::portfolio_optimization)];
  port.weight = 0.15;
  port.required_skills = {"finance", "optimization"};
  port.flops_lo = 1e14;
  port.flops_hi = 1e16;
  port.sensitivity_lo = 0.3;
  port.sensitivity_hi = 0.8;
  port.complexity_multiplier = default_complexity_multiplier(TaskType::portfolio_optimization);
  port.model_memory_bytes = 12e9;
  port.kv_cache_bytes = 4e9;
  port.activation_bytes = 4e9;

  auto& sent = t[idx(TaskType::sentiment_analysis)];
  sent.weight = 0.2;
  sent.required_skills = {"nlp", "text"};
  sent.flops_lo = 1e13;
  sent.flops_hi = 1e15;
  sent.sensitivity_lo = 0.0;
  sent.sensitivity_hi = 0.4;
  sent.complexity_multiplier = default_complexity_multiplier(TaskType::sentiment_analysis);
  sent.model_memory_bytes = 2e9;
  sent.kv_cache_bytes = 5e8;
  sent.activation_bytes = 5e8;
  sent.max_latency_s = 900.0;

  auto& gen = t[idx(TaskType::generic_compute)];
  gen.weight = 0.2;
  gen.required_skills = {"compute"};
  gen.flops_lo = 2e13;
  gen.flops_hi = 2e15;
  gen.sensitivity_lo = 0.0;
  gen.sensitivity_hi = 0.5;
  gen.complexity_multiplier = default_complexity_multiplier(TaskType::generic_compute);

  for (auto& x : t) {
    x.value_per_pflop_lo = 1.0;
    x.value_per_pflop_hi = 2.0;
  }
  return t;
}

}  // namespace

ScenarioConfig default_scenario() {
  ScenarioConfig s;
  s.name = "default";
  s.n_clients = 15;
  s.n_contractors = 30;
  s.duration_days = 7.0;
  s.arrival_rate_per_hour = 2.5;
  s.archetype_mix = {0.2, 0.2, 0.15, 0.15, 0.15, 0.15};
  s.seed = 42;
  s.archetypes = default_archetypes();
  s.task_types = default_task_types();
  // Fully loaded in-house cost: hardware, power, staff and facility.
  s.client_hardware = {1.0e12, 15.0, 32e9, 0.3, 400.0, 0.8, 0.12, 1.0e8, 1e-11, 0.3};
  s.client_hardware_spread = 0.1;
  s.engine.prior_failure_prob = 0.3;
  s.engine.prior_quality_prob = 0.2;
  s.engine.prior_security_prob = 0.1;
  s.engine.gamma_impact = 3.0;
  s.coordination_cost_per_peer = 0.05;
  s.shared_domain_similarity = 0.6;
  s.skill_mismatch_quality_penalty = 1.0;
  s.history_sharing = HistorySharing::full;
  return s;
}

ScenarioConfig stationary_scenario() {
  ScenarioConfig s = default_scenario();
  s.name = "stationary";
  // Fixed market, independent learners, long enough to settle.
  s.volatility = {0.8, 0.8, 0.0, 0.0};
  s.history_sharing = HistorySharing::none;
  s.duration_days = 60.0;
  return s;
}

namespace {

constexpr std::array<double, 9> kDurations = {1, 3, 5, 7, 10, 14, 20, 25, 30};
constexpr std::array<std::uint32_t, 8> kClientCounts = {5, 10, 15, 20, 25, 30, 40, 50};

std::string numbered(const char* prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%s_%02zu", prefix, i + 1);
  return buf;
}

}  // namespace

std::optional<ScenarioConfig> scenario_preset(std::string_view name) {
  if (name == "default") return default_scenario();
  if (name == "stationary") return stationary_scenario();
  for (std::size_t i = 0; i < kDurations.size(); ++i) {
    if (name == numbered("dur", i)) {
      ScenarioConfig s = default_scenario();
      s.name = std::string(name);
      s.duration_days = kDurations[i];
      return s;
    }
  }
  for (std::size_t i = 0; i < kClientCounts.size(); ++i) {
    if (name == numbered("agt", i)) {
      ScenarioConfig s = default_scenario();
      s.name = std::string(name);
      s.n_clients = kClientCounts[i];
      s.n_contractors = 2 * kClientCounts[i];
      return s;
    }
  }
  return std::nullopt;
}

std::vector<std::string> scenario_preset_names() {
  std::vector<std::string> out = {"default", "stationary"};
  for (std::size_t i = 0; i < kDurations.size(); ++i) out.push_back(numbered("dur", i));
  for (std::size_t i = 0; i < kClientCounts.size(); ++i) out.push_back(numbered("agt", i));
  return out;
}

}  // namespace coalesce
