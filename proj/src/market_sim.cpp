#include "coalesce/market_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coalesce/decision_engine.hpp"

namespace coalesce {

namespace {

void normalize_in_place(Embedding& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

Embedding noisy_mix(const std::array<Embedding, kTaskTypeCount>& centroids,
                    const std::array<double, kTaskTypeCount>& mix, double noise, Rng& rng) {
  const std::size_t dim = centroids[0].size();
  Embedding v(dim, 0.0);
  for (std::size_t t = 0; t < kTaskTypeCount; ++t) {
    for (std::size_t d = 0; d < dim; ++d) v[d] += mix[t] * centroids[t][d];
  }
  normalize_in_place(v);
  // Per-component noise scaled so its expected norm is `noise`.
  const double per = noise / std::sqrt(static_cast<double>(dim));
  for (double& x : v) x += per * rng.normal();
  normalize_in_place(v);
  return v;
}

double jitter(Rng& rng, double spread) { return rng.uniform(1.0 - spread, 1.0 + spread); }

void check(std::vector<Violation>& out, bool ok, std::string field, std::string message) {
  if (!ok) out.push_back({std::move(field), std::move(message)});
}

}  // namespace

std::vector<Violation> validate(const ScenarioConfig& s) {
  std::vector<Violation> out;
  for (auto& v : validate(s.engine)) out.push_back({"engine." + v.field, v.message});
  check(out, s.n_clients >= 1, "n_clients", "must be >= 1");
  check(out, s.n_contractors >= 1, "n_contractors", "must be >= 1");
  check(out, s.duration_days >= 0.0 && std::isfinite(s.duration_days), "duration_days",
        "must be >= 0");
  check(out, s.arrival_rate_per_hour > 0.0 && std::isfinite(s.arrival_rate_per_hour),
        "arrival_rate_per_hour", "must be > 0");
  double mix_sum = 0.0;
  for (std::size_t a = 0; a < kArchetypeCount; ++a) {
    check(out, s.archetype_mix[a] >= 0.0,
          "archetype_mix." + std::string(to_string(static_cast<Archetype>(a))), "must be >= 0");
    mix_sum += s.archetype_mix[a];
  }
  check(out, std::abs(mix_sum - 1.0) <= 1e-9, "archetype_mix",
        "fractions must sum to 1, got " + std::to_string(mix_sum));
  const auto& b = s.volatility;
  check(out, 0.0 <= b.capacity_lo && b.capacity_lo <= b.capacity_hi && b.capacity_hi <= 1.0,
        "volatility.capacity", "band must satisfy 0 <= lo <= hi <= 1");
  check(out, b.demand_jitter >= 0.0 && b.demand_jitter <= 1.0, "volatility.demand_jitter",
        "must be in [0, 1]");
  check(out, b.price_jitter >= 0.0 && b.price_jitter < 1.0, "volatility.price_jitter",
        "must be in [0, 1)");
  for (auto& v : validate(s.client_hardware, "client_hardware")) out.push_back(v);
  check(out, s.client_hardware_spread >= 0.0 && s.client_hardware_spread < 1.0,
        "client_hardware_spread", "must be in [0, 1)");
  for (std::size_t a = 0; a < kArchetypeCount; ++a) {
    const auto& t = s.archetypes[a];
    const std::string p = "archetypes." + std::string(to_string(static_cast<Archetype>(a)));
    for (auto& v : validate(t.hardware, p + ".hardware")) out.push_back(v);
    check(out, t.base_price > 0.0, p + ".base_price", "must be > 0");
    check(out, t.price_spread >= 0.0 && t.price_spread < 1.0, p + ".price_spread",
          "must be in [0, 1)");
    check(out, t.hardware_spread >= 0.0 && t.hardware_spread < 1.0, p + ".hardware_spread",
          "must be in [0, 1)");
    check(out, t.capacity > 0.0, p + ".capacity", "must be > 0");
    check(out, t.dispatch_delay_s >= 0.0, p + ".dispatch_delay_s", "must be >= 0");
    check(out, 0.0 <= t.channel_security && t.channel_security <= 1.0, p + ".channel_security",
          "must be in [0, 1]");
    for (double q : t.breach_probs) {
      check(out, 0.0 <= q && q <= 1.0, p + ".breach_probs", "must be in [0, 1]");
    }
    check(out, 0.0 <= t.failure_prob_lo && t.failure_prob_lo <= t.failure_prob_hi &&
                   t.failure_prob_hi <= 1.0,
          p + ".failure_prob", "band must satisfy 0 <= lo <= hi <= 1");
    check(out, 0.0 <= t.quality_prob_lo && t.quality_prob_lo <= t.quality_prob_hi &&
                   t.quality_prob_hi <= 1.0,
          p + ".quality_prob", "band must satisfy 0 <= lo <= hi <= 1");
    check(out, std::is_sorted(t.skills.begin(), t.skills.end()) &&
                   std::adjacent_find(t.skills.begin(), t.skills.end()) == t.skills.end(),
          p + ".skills", "must be sorted and unique");
  }
  double task_weight = 0.0;
  for (std::size_t k = 0; k < kTaskTypeCount; ++k) {
    const auto& t = s.task_types[k];
    const std::string p = "task_types." + std::string(to_string(static_cast<TaskType>(k)));
    check(out, t.weight >= 0.0, p + ".weight", "must be >= 0");
    task_weight += t.weight;
    check(out, 0.0 < t.flops_lo && t.flops_lo <= t.flops_hi, p + ".flops",
          "band must satisfy 0 < lo <= hi");
    check(out, 0.0 < t.input_bytes_lo && t.input_bytes_lo <= t.input_bytes_hi, p + ".input_bytes",
          "band must satisfy 0 < lo <= hi");
    check(out, 0.0 < t.output_bytes_lo && t.output_bytes_lo <= t.output_bytes_hi,
          p + ".output_bytes", "band must satisfy 0 < lo <= hi");
    check(out, 0.0 <= t.value_per_pflop_lo && t.value_per_pflop_lo <= t.value_per_pflop_hi,
          p + ".value_per_pflop",
          "band must satisfy 0 <= lo <= hi");
    check(out, 0.0 <= t.urgency_lo && t.urgency_lo <= t.urgency_hi && t.urgency_hi <= 1.0,
          p + ".urgency", "band must be within [0, 1]");
    check(out,
          0.0 <= t.sensitivity_lo && t.sensitivity_lo <= t.sensitivity_hi &&
              t.sensitivity_hi <= 1.0,
          p + ".sensitivity", "band must be within [0, 1]");
    check(out, t.complexity_multiplier > 0.0, p + ".complexity_multiplier", "must be > 0");
    check(out, t.model_memory_bytes >= 0.0 && t.kv_cache_bytes >= 0.0 && t.activation_bytes >= 0.0,
          p + ".memory", "must be >= 0");
    check(out, !t.max_latency_s || *t.max_latency_s > 0.0, p + ".max_latency_s", "must be > 0");
    check(out, std::is_sorted(t.required_skills.begin(), t.required_skills.end()) &&
                   std::adjacent_find(t.required_skills.begin(), t.required_skills.end()) ==
                       t.required_skills.end(),
          p + ".required_skills", "must be sorted and unique");
  }
  check(out, task_weight > 0.0, "task_types", "at least one task type needs positive weight");
  check(out, s.market_step_h > 0.0, "market_step_h", "must be > 0");
  check(out, s.demand_ratio >= 0.0, "demand_ratio", "must be >= 0");
  check(out, 0.0 <= s.initial_failure_rate && s.initial_failure_rate <= 1.0,
        "initial_failure_rate", "must be in [0, 1]");
  check(out, s.execution_noise_sigma >= 0.0, "execution_noise_sigma", "must be >= 0");
  check(out, 0.0 <= s.input_required_prob && s.input_required_prob <= 1.0,
        "input_required_prob", "must be in [0, 1]");
  check(out, s.input_round_trip_s >= 0.0, "input_round_trip_s", "must be >= 0");
  check(out, s.coordination_cost_per_peer >= 0.0, "coordination_cost_per_peer", "must be >= 0");
  check(out, 0.0 <= s.shared_domain_similarity && s.shared_domain_similarity < 1.0,
        "shared_domain_similarity", "must be in [0, 1)");
  check(out, 0.0 <= s.skill_mismatch_quality_penalty && s.skill_mismatch_quality_penalty <= 1.0,
        "skill_mismatch_quality_penalty", "must be in [0, 1]");
  return out;
}

std::array<Embedding, kTaskTypeCount> task_type_centroids(std::size_t dim, double shared) {
  // Orthonormal basis: one shared domain direction plus one direction per
  // type (Gram-Schmidt; falls back to the raw draw when dim is too small).
  Rng rng(derive_seed(0xC0A1E5CEULL, {dim}));
  std::vector<Embedding> basis;
  for (std::size_t k = 0; k <= kTaskTypeCount; ++k) {
    Embedding c(dim);
    for (double& x : c) x = rng.normal();
    Embedding raw = c;
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += c[d] * b[d];
      for (std::size_t d = 0; d < dim; ++d) c[d] -= dot * b[d];
    }
    double n = 0.0;
    for (double x : c) n += x * x;
    if (n < 1e-12) c = raw;
    normalize_in_place(c);
    basis.push_back(std::move(c));
  }
  const double a = std::sqrt(shared);
  const double b = std::sqrt(1.0 - shared);
  std::array<Embedding, kTaskTypeCount> out;
  for (std::size_t k = 0; k < kTaskTypeCount; ++k) {
    out[k].resize(dim);
    for (std::size_t d = 0; d < dim; ++d) out[k][d] = a * basis[0][d] + b * basis[k + 1][d];
    normalize_in_place(out[k]);
  }
  return out;
}

Population generate_population(const ScenarioConfig& s, Rng& rng) {
  Population pop;
  const auto centroids = task_type_centroids(s.engine.embedding_dim, s.shared_domain_similarity);

  pop.clients.reserve(s.n_clients);
  for (ClientId i = 0; i < s.n_clients; ++i) {
    ClientProfile c;
    c.id = i;
    c.hardware = s.client_hardware;
    const double f = jitter(rng, s.client_hardware_spread);
    c.hardware.peak_flops *= f;
    c.hardware.hw_cost_per_hour *= f;
    pop.clients.push_back(c);
  }

  std::array<double, kArchetypeCount> cumulative{};
  std::partial_sum(s.archetype_mix.begin(), s.archetype_mix.end(), cumulative.begin());

  pop.contractors.reserve(s.n_contractors);
  for (ContractorId j = 0; j < s.n_contractors; ++j) {
    const double u = rng.uniform() * cumulative.back();
    std::size_t a = 0;
    while (a + 1 < kArchetypeCount && (u >= cumulative[a] || s.archetype_mix[a] == 0.0)) ++a;
    const ArchetypeTemplate& t = s.archetypes[a];

    ContractorProfile c;
    c.id = j;
    c.archetype = static_cast<Archetype>(a);
    c.skills = t.skills;
    c.hardware = t.hardware;
    const double hw_scale = jitter(rng, t.hardware_spread);
    c.hardware.peak_flops *= hw_scale;
    c.nominal_base_price = t.base_price * jitter(rng, t.price_spread);
    c.base_price = c.nominal_base_price;
    c.demand_sensitivity = t.demand_sensitivity;
    c.capacity = t.capacity;
    c.capacity_utilization = rng.uniform(s.volatility.capacity_lo, s.volatility.capacity_hi);
    c.dispatch_delay_s = t.dispatch_delay_s;
    c.breach_probs = t.breach_probs;
    c.channel_security = t.channel_security;
    c.true_failure_prob = rng.uniform(t.failure_prob_lo, t.failure_prob_hi);
    c.true_quality_degradation_prob = rng.uniform(t.quality_prob_lo, t.quality_prob_hi);
    c.skill_embedding = noisy_mix(centroids, t.affinity, t.embedding_noise, rng);
    pop.contractors.push_back(std::move(c));
  }
  return pop;
}

std::vector<Task> generate_tasks(const ScenarioConfig& s, Rng& rng) {
  const auto centroids = task_type_centroids(s.engine.embedding_dim, s.shared_domain_similarity);
  const double horizon_h = s.duration_days * 24.0;

  std::array<double, kTaskTypeCount> cumulative{};
  for (std::size_t k = 0; k < kTaskTypeCount; ++k) {
    cumulative[k] = (k ? cumulative[k - 1] : 0.0) + s.task_types[k].weight;
  }

  std::vector<Task> tasks;
  for (ClientId client = 0; client < s.n_clients; ++client) {
    double t = 0.0;
    while (true) {
      t += rng.exponential(s.arrival_rate_per_hour);
      if (t >= horizon_h) break;
      const double u = rng.uniform() * cumulative.back();
      std::size_t k = 0;
      while (k + 1 < kTaskTypeCount && (u >= cumulative[k] || s.task_types[k].weight == 0.0)) ++k;
      const TaskTemplate& tt = s.task_types[k];

      Task task;
      task.client = client;
      task.task_type = static_cast<TaskType>(k);
      task.arrival_time_h = t;
      task.flops_required = rng.log_uniform(tt.flops_lo, tt.flops_hi);
      task.input_size_bytes = rng.log_uniform(tt.input_bytes_lo, tt.input_bytes_hi);
      task.output_size_bytes = rng.log_uniform(tt.output_bytes_lo, tt.output_bytes_hi);
      task.value = rng.uniform(tt.value_per_pflop_lo, tt.value_per_pflop_hi) *
                   task.flops_required / 1e15;
      task.urgency = rng.uniform(tt.urgency_lo, tt.urgency_hi);
      task.data_sensitivity = rng.uniform(tt.sensitivity_lo, tt.sensitivity_hi);
      task.complexity_multiplier = tt.complexity_multiplier;
      task.model_memory_bytes = tt.model_memory_bytes;
      task.kv_cache_bytes = tt.kv_cache_bytes;
      task.activation_bytes = tt.activation_bytes;
      task.max_latency_s = tt.max_latency_s;
      task.required_skills = tt.required_skills;
      std::array<double, kTaskTypeCount> mix{};
      mix[k] = 1.0;
      task.requirement_embedding = noisy_mix(centroids, mix, tt.embedding_noise, rng);
      tasks.push_back(std::move(task));
    }
  }
  std::stable_sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return a.arrival_time_h < b.arrival_time_h;
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) tasks[i].id = i;
  return tasks;
}

namespace {

void recompute_supply(MarketState& m, std::span<const ContractorProfile> contractors) {
  double total = 0.0, available = 0.0;
  for (const auto& c : contractors) {
    total += c.capacity;
    available += c.capacity * (1.0 - c.capacity_utilization);
  }
  m.total_supply = total;
  m.available_supply = std::clamp(available, 0.0, total);
  m.market_pressure = market_pressure_of(m.available_supply, m.total_supply);
}

}  // namespace

MarketState initial_market(const ScenarioConfig& s,
                           std::span<const ContractorProfile> contractors) {
  MarketState m;
  recompute_supply(m, contractors);
  m.base_demand = s.demand_ratio * m.total_supply;
  m.current_demand = m.base_demand;
  m.failure_rate = s.initial_failure_rate;
  m.price_volatility = s.volatility.price_jitter;
  m.demand_fluctuation = s.volatility.demand_jitter;
  return m;
}

MarketState step_market(const MarketState& market, std::vector<ContractorProfile>& contractors,
                        const VolatilityBands& b, Rng& rng) {
  MarketState m = market;
  m.current_demand = std::max(0.0, m.base_demand * jitter(rng, b.demand_jitter));
  for (auto& c : contractors) {
    c.capacity_utilization = std::clamp(rng.uniform(b.capacity_lo, b.capacity_hi), 0.0, 1.0);
    c.base_price = c.nominal_base_price * jitter(rng, b.price_jitter);
  }
  recompute_supply(m, contractors);
  m.price_volatility = b.price_jitter;
  m.demand_fluctuation = b.demand_jitter;
  return m;
}

std::string_view to_string(HistorySharing h) {
  switch (h) {
    case HistorySharing::none: return "none";
    case HistorySharing::reputation: return "reputation";
    case HistorySharing::full: return "full";
  }
  return "none";
}

std::optional<HistorySharing> parse_history_sharing(std::string_view s) {
  for (auto h : {HistorySharing::none, HistorySharing::reputation, HistorySharing::full}) {
    if (s == to_string(h)) return h;
  }
  return std::nullopt;
}

double skill_coverage(const SkillSet& have, const SkillSet& required) {
  if (required.empty()) return 1.0;
  std::size_t covered = 0;
  for (const auto& r : required) {
    covered += std::binary_search(have.begin(), have.end(), r) ? 1 : 0;
  }
  return static_cast<double>(covered) / static_cast<double>(required.size());
}

double true_quality_prob(const ContractorProfile& c, const Task& task, double mismatch_penalty) {
  const double miss = 1.0 - skill_coverage(c.skills, task.required_skills);
  return std::clamp(c.true_quality_degradation_prob + mismatch_penalty * miss, 0.0, 1.0);
}

double billable(const CostBreakdown& e) {
  return e.price() + e.communication() + e.verification() + e.integration();
}

ExecutionOutcome execute_task(const Task& task, const Executor& executor, double start_h,
                              const ExecutionOptions& opt, Rng& rng) {
  ExecutionOutcome out{0.0, 0.0, 0.0, Outcome::success, TaskLifecycle(task.arrival_time_h)};

  if (const auto* local = std::get_if<LocalExecutor>(&executor)) {
    if (task.memory_demand_bytes() > local->hardware->mem_total_bytes) {
      throw std::invalid_argument("local hardware cannot host task " + std::to_string(task.id));
    }
    const double exec_s = execution_hours(task, *local->hardware) * kSecondsPerHour;
    const double begin_h = start_h + local->queue_wait_s / kSecondsPerHour;
    out.actual_cost = local->internal.total();
    out.actual_latency_s = local->queue_wait_s + exec_s;
    out.lifecycle.advance(LifecycleState::working, begin_h);
    out.lifecycle.advance(LifecycleState::completed, begin_h + exec_s / kSecondsPerHour);
    return out;
  }

  const auto& remote = std::get<ContractorExecutor>(executor);
  const ContractorProfile& c = *remote.contractor;
  if (!can_host(c, task)) {
    throw std::invalid_argument("contractor " + std::to_string(c.id) + " cannot host task " +
                                std::to_string(task.id));
  }
  // Fixed draw order keeps streams aligned whatever the result.
  const double cost_noise = rng.lognormal(opt.noise_sigma);
  const double latency_noise = rng.lognormal(opt.noise_sigma);
  const double u_fail = rng.uniform();
  const double u_security = rng.uniform();
  const double u_quality = rng.uniform();
  const double u_input = rng.uniform();

  if (u_fail < c.true_failure_prob) {
    out.result = Outcome::failure;
  } else if (u_security < security_risk(c, task)) {
    out.result = Outcome::security_incident;
  } else if (u_quality < true_quality_prob(c, task, opt.skill_mismatch_quality_penalty)) {
    out.result = Outcome::quality_degraded;
  }

  double latency_s = estimated_latency_s(task, c) * latency_noise;
  out.lifecycle.advance(LifecycleState::working, start_h);
  if (u_input < opt.input_required_prob) {
    const double mid_h = start_h + 0.5 * latency_s / kSecondsPerHour;
    out.lifecycle.advance(LifecycleState::input_required, mid_h);
    out.lifecycle.advance(LifecycleState::working,
                          mid_h + opt.input_round_trip_s / kSecondsPerHour);
    latency_s += opt.input_round_trip_s;
  }
  const double end_h = start_h + latency_s / kSecondsPerHour;
  out.actual_latency_s = latency_s;
  out.billed_cost = billable(remote.external) * cost_noise;
  out.actual_cost = out.billed_cost;
  if (out.result == Outcome::failure) {
    out.lifecycle.advance(LifecycleState::failed, end_h);
    return out;
  }
  if (out.result == Outcome::security_incident || out.result == Outcome::quality_degraded) {
    out.actual_cost += task.value * opt.gamma_impact;
  }
  out.actual_cost += latency_penalty(task, latency_s);
  out.lifecycle.advance(LifecycleState::completed, end_h);
  return out;
}

}  // namespace coalesce
