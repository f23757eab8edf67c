#include "coalesce/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace coalesce {

InvalidInput::InvalidInput(std::vector<Violation> v)
    : std::runtime_error([&] {
        std::string msg = "invalid input:";
        for (const auto& x : v) msg += " " + x.field + ": " + x.message + ";";
        return msg;
      }()),
      violations(std::move(v)) {}

namespace {

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <std::size_t N, typename Name>
Json keyed(const std::array<double, N>& values, Name name_of) {
  Json j = Json::object();
  for (std::size_t i = 0; i < N; ++i) j[std::string(name_of(i))] = values[i];
  return j;
}

Json to_json(const VolatilityBands& b) {
  return {{"capacity_lo", b.capacity_lo},
          {"capacity_hi", b.capacity_hi},
          {"demand_jitter", b.demand_jitter},
          {"price_jitter", b.price_jitter}};
}

Json to_json(const ArchetypeTemplate& t) {
  return {{"hardware", to_json(t.hardware)},
          {"hardware_spread", t.hardware_spread},
          {"base_price", t.base_price},
          {"price_spread", t.price_spread},
          {"demand_sensitivity", t.demand_sensitivity},
          {"capacity", t.capacity},
          {"dispatch_delay_s", t.dispatch_delay_s},
          {"skills", t.skills},
          {"affinity", keyed(t.affinity, [](std::size_t i) {
             return to_string(static_cast<TaskType>(i));
           })},
          {"embedding_noise", t.embedding_noise},
          {"breach_probs", t.breach_probs},
          {"channel_security", t.channel_security},
          {"failure_prob_lo", t.failure_prob_lo},
          {"failure_prob_hi", t.failure_prob_hi},
          {"quality_prob_lo", t.quality_prob_lo},
          {"quality_prob_hi", t.quality_prob_hi}};
}

Json to_json(const TaskTemplate& t) {
  return {{"weight", t.weight},
          {"required_skills", t.required_skills},
          {"flops_lo", t.flops_lo},
          {"flops_hi", t.flops_hi},
          {"input_bytes_lo", t.input_bytes_lo},
          {"input_bytes_hi", t.input_bytes_hi},
          {"output_bytes_lo", t.output_bytes_lo},
          {"output_bytes_hi", t.output_bytes_hi},
          {"value_per_pflop_lo", t.value_per_pflop_lo},
          {"value_per_pflop_hi", t.value_per_pflop_hi},
          {"urgency_lo", t.urgency_lo},
          {"urgency_hi", t.urgency_hi},
          {"sensitivity_lo", t.sensitivity_lo},
          {"sensitivity_hi", t.sensitivity_hi},
          {"complexity_multiplier", t.complexity_multiplier},
          {"model_memory_bytes", t.model_memory_bytes},
          {"kv_cache_bytes", t.kv_cache_bytes},
          {"activation_bytes", t.activation_bytes},
          {"max_latency_s", optional_number(t.max_latency_s)},
          {"embedding_noise", t.embedding_noise}};
}

bool is_number(const Json& j) { return j.is_number(); }

// Overlays `patch` onto `target`, which already holds every known field.
void overlay(Json& target, const Json& patch, const std::string& path,
             std::vector<Violation>& out) {
  if (!patch.is_object()) {
    out.push_back({path.empty() ? "<root>" : path, "expected an object"});
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string field = path.empty() ? it.key() : path + "." + it.key();
    if (!target.contains(it.key())) {
      out.push_back({field, "unknown field"});
      continue;
    }
    Json& t = target[it.key()];
    const Json& v = it.value();
    if (t.is_object()) {
      overlay(t, v, field, out);
      continue;
    }
    const bool nullable = t.is_null() || field.ends_with("max_latency_s");
    const bool ok = (is_number(t) && is_number(v)) || (t.is_null() && is_number(v)) ||
                    (nullable && v.is_null()) || (t.is_string() && v.is_string()) ||
                    (t.is_boolean() && v.is_boolean()) || (t.is_array() && v.is_array());
    if (!ok) {
      out.push_back({field, std::string("wrong type: expected ") + t.type_name() + ", got " +
                                v.type_name()});
      continue;
    }
    t = v;
  }
}

struct Reader {
  std::vector<Violation>& out;

  double num(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = j.at(key);
    if (!v.is_number()) {
      out.push_back({path + key, "expected a number"});
      return 0.0;
    }
    return v.get<double>();
  }

  std::optional<double> opt_num(const Json& j, const std::string& key, const std::string& path) {
    if (j.at(key).is_null()) return std::nullopt;
    return num(j, key, path);
  }

  std::int64_t integer(const Json& j, const std::string& key, const std::string& path,
                       std::int64_t lo, std::int64_t hi) {
    const Json& v = j.at(key);
    if (!v.is_number_integer()) {
      out.push_back({path + key, "expected an integer"});
      return lo;
    }
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) {
      out.push_back({path + key, "must be <= " + std::to_string(hi)});
      return lo;
    }
    const std::int64_t x = v.get<std::int64_t>();
    if (x < lo || x > hi) {
      out.push_back({path + key, "must be in [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "]"});
      return lo;
    }
    return x;
  }

  std::uint64_t seed(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    out.push_back({path + key, "expected a non-negative integer"});
    return 0;
  }

  std::vector<std::string> strings(const Json& j, const std::string& key,
                                   const std::string& path) {
    std::vector<std::string> r;
    for (const auto& x : j.at(key)) {
      if (!x.is_string()) {
        out.push_back({path + key, "expected a list of strings"});
        return {};
      }
      r.push_back(x.get<std::string>());
    }
    return r;
  }

  std::vector<double> numbers(const Json& j, const std::string& key, const std::string& path) {
    std::vector<double> r;
    for (const auto& x : j.at(key)) {
      if (!x.is_number()) {
        out.push_back({path + key, "expected a list of numbers"});
        return {};
      }
      r.push_back(x.get<double>());
    }
    return r;
  }

  HardwareSpec hardware(const Json& j, const std::string& p) {
    HardwareSpec h;
    h.peak_flops = num(j, "peak_flops", p);
    h.hw_cost_per_hour = num(j, "hw_cost_per_hour", p);
    h.mem_total_bytes = num(j, "mem_total_bytes", p);
    h.mem_cost_per_hour = num(j, "mem_cost_per_hour", p);
    h.tdp_watts = num(j, "tdp_watts", p);
    h.utilization_factor = num(j, "utilization_factor", p);
    h.kwh_cost = num(j, "kwh_cost", p);
    h.bandwidth_bytes_per_s = num(j, "bandwidth_bytes_per_s", p);
    h.transfer_cost_per_byte = num(j, "transfer_cost_per_byte", p);
    h.depreciation_per_hour = num(j, "depreciation_per_hour", p);
    return h;
  }

  EngineConfig engine(const Json& j, const std::string& p) {
    EngineConfig c;
    c.epsilon = num(j, "epsilon", p);
    c.theta_skill = num(j, "theta_skill", p);
    c.tau_threshold = num(j, "tau_threshold", p);
    c.rho_min = num(j, "rho_min", p);
    c.alpha_corr = num(j, "alpha_corr", p);
    c.beta_market = num(j, "beta_market", p);
    const Json& sw = j.at("skill_weights");
    c.skill_weights.ontological = num(sw, "ontological", p + "skill_weights.");
    c.skill_weights.embedding = num(sw, "embedding", p + "skill_weights.");
    c.skill_weights.performance = num(sw, "performance", p + "skill_weights.");
    c.ewma_lambda = num(j, "ewma_lambda", p);
    c.decay_lambda_per_month = num(j, "decay_lambda_per_month", p);
    c.prior_alpha_success = num(j, "prior_alpha_success", p);
    c.prior_beta_failure = num(j, "prior_beta_failure", p);
    c.prior_failure_prob = num(j, "prior_failure_prob", p);
    c.prior_quality_prob = num(j, "prior_quality_prob", p);
    c.prior_security_prob = num(j, "prior_security_prob", p);
    c.z_alpha_half = num(j, "z_alpha_half", p);
    c.learning_value_weight = num(j, "learning_value_weight", p);
    c.gamma_impact = num(j, "gamma_impact", p);
    c.protocol_overhead_cost = num(j, "protocol_overhead_cost", p);
    c.verification_cost = num(j, "verification_cost", p);
    c.integration_cost = num(j, "integration_cost", p);
    c.embedding_dim = static_cast<std::size_t>(integer(j, "embedding_dim", p, 1, 4096));
    return c;
  }

  ArchetypeTemplate archetype(const Json& j, const std::string& p) {
    ArchetypeTemplate t;
    t.hardware = hardware(j.at("hardware"), p + "hardware.");
    t.hardware_spread = num(j, "hardware_spread", p);
    t.base_price = num(j, "base_price", p);
    t.price_spread = num(j, "price_spread", p);
    t.demand_sensitivity = num(j, "demand_sensitivity", p);
    t.capacity = num(j, "capacity", p);
    t.dispatch_delay_s = num(j, "dispatch_delay_s", p);
    t.skills = strings(j, "skills", p);
    for (std::size_t k = 0; k < kTaskTypeCount; ++k) {
      t.affinity[k] =
          num(j.at("affinity"), std::string(to_string(static_cast<TaskType>(k))), p + "affinity.");
    }
    t.embedding_noise = num(j, "embedding_noise", p);
    t.breach_probs = numbers(j, "breach_probs", p);
    t.channel_security = num(j, "channel_security", p);
    t.failure_prob_lo = num(j, "failure_prob_lo", p);
    t.failure_prob_hi = num(j, "failure_prob_hi", p);
    t.quality_prob_lo = num(j, "quality_prob_lo", p);
    t.quality_prob_hi = num(j, "quality_prob_hi", p);
    return t;
  }

  TaskTemplate task_type(const Json& j, const std::string& p) {
    TaskTemplate t;
    t.weight = num(j, "weight", p);
    t.required_skills = strings(j, "required_skills", p);
    t.flops_lo = num(j, "flops_lo", p);
    t.flops_hi = num(j, "flops_hi", p);
    t.input_bytes_lo = num(j, "input_bytes_lo", p);
    t.input_bytes_hi = num(j, "input_bytes_hi", p);
    t.output_bytes_lo = num(j, "output_bytes_lo", p);
    t.output_bytes_hi = num(j, "output_bytes_hi", p);
    t.value_per_pflop_lo = num(j, "value_per_pflop_lo", p);
    t.value_per_pflop_hi = num(j, "value_per_pflop_hi", p);
    t.urgency_lo = num(j, "urgency_lo", p);
    t.urgency_hi = num(j, "urgency_hi", p);
    t.sensitivity_lo = num(j, "sensitivity_lo", p);
    t.sensitivity_hi = num(j, "sensitivity_hi", p);
    t.complexity_multiplier = num(j, "complexity_multiplier", p);
    t.model_memory_bytes = num(j, "model_memory_bytes", p);
    t.kv_cache_bytes = num(j, "kv_cache_bytes", p);
    t.activation_bytes = num(j, "activation_bytes", p);
    t.max_latency_s = opt_num(j, "max_latency_s", p);
    t.embedding_noise = num(j, "embedding_noise", p);
    return t;
  }
};

}  // namespace

Json to_json(const HardwareSpec& h) {
  return {{"peak_flops", h.peak_flops},
          {"hw_cost_per_hour", h.hw_cost_per_hour},
          {"mem_total_bytes", h.mem_total_bytes},
          {"mem_cost_per_hour", h.mem_cost_per_hour},
          {"tdp_watts", h.tdp_watts},
          {"utilization_factor", h.utilization_factor},
          {"kwh_cost", h.kwh_cost},
          {"bandwidth_bytes_per_s", h.bandwidth_bytes_per_s},
          {"transfer_cost_per_byte", h.transfer_cost_per_byte},
          {"depreciation_per_hour", h.depreciation_per_hour}};
}

Json to_json(const EngineConfig& c) {
  return {{"epsilon", c.epsilon},
          {"theta_skill", c.theta_skill},
          {"tau_threshold", c.tau_threshold},
          {"rho_min", c.rho_min},
          {"alpha_corr", c.alpha_corr},
          {"beta_market", c.beta_market},
          {"skill_weights",
           {{"ontological", c.skill_weights.ontological},
            {"embedding", c.skill_weights.embedding},
            {"performance", c.skill_weights.performance}}},
          {"ewma_lambda", c.ewma_lambda},
          {"decay_lambda_per_month", c.decay_lambda_per_month},
          {"prior_alpha_success", c.prior_alpha_success},
          {"prior_beta_failure", c.prior_beta_failure},
          {"prior_failure_prob", c.prior_failure_prob},
          {"prior_quality_prob", c.prior_quality_prob},
          {"prior_security_prob", c.prior_security_prob},
          {"z_alpha_half", c.z_alpha_half},
          {"learning_value_weight", c.learning_value_weight},
          {"gamma_impact", c.gamma_impact},
          {"protocol_overhead_cost", c.protocol_overhead_cost},
          {"verification_cost", c.verification_cost},
          {"integration_cost", c.integration_cost},
          {"embedding_dim", c.embedding_dim}};
}

Json to_json(const ScenarioConfig& s) {
  Json archetypes = Json::object();
  for (std::size_t a = 0; a < kArchetypeCount; ++a) {
    archetypes[std::string(to_string(static_cast<Archetype>(a)))] = to_json(s.archetypes[a]);
  }
  Json task_types = Json::object();
  for (std::size_t k = 0; k < kTaskTypeCount; ++k) {
    task_types[std::string(to_string(static_cast<TaskType>(k)))] = to_json(s.task_types[k]);
  }
  return {{"name", s.name},
          {"n_clients", s.n_clients},
          {"n_contractors", s.n_contractors},
          {"duration_days", s.duration_days},
          {"arrival_rate_per_hour", s.arrival_rate_per_hour},
          {"archetype_mix", keyed(s.archetype_mix,
                                  [](std::size_t i) { return to_string(static_cast<Archetype>(i)); })},
          {"volatility", to_json(s.volatility)},
          {"seed", s.seed},
          {"engine", to_json(s.engine)},
          {"archetypes", archetypes},
          {"task_types", task_types},
          {"client_hardware", to_json(s.client_hardware)},
          {"client_hardware_spread", s.client_hardware_spread},
          {"market_step_h", s.market_step_h},
          {"demand_ratio", s.demand_ratio},
          {"initial_failure_rate", s.initial_failure_rate},
          {"execution_noise_sigma", s.execution_noise_sigma},
          {"input_required_prob", s.input_required_prob},
          {"input_round_trip_s", s.input_round_trip_s},
          {"coordination_cost_per_peer", s.coordination_cost_per_peer},
          {"skill_mismatch_quality_penalty", s.skill_mismatch_quality_penalty},
          {"shared_domain_similarity", s.shared_domain_similarity},
          {"history_sharing", std::string(to_string(s.history_sharing))}};
}

ScenarioConfig scenario_from_json(const Json& doc, const ScenarioConfig& base) {
  std::vector<Violation> errors;
  Json merged = to_json(base);
  overlay(merged, doc, "", errors);
  if (!errors.empty()) throw InvalidInput(std::move(errors));

  Reader r{errors};
  ScenarioConfig s;
  const Json& m = merged;
  if (!m.at("name").is_string()) {
    errors.push_back({"name", "expected a string"});
  } else {
    s.name = m.at("name").get<std::string>();
  }
  constexpr std::int64_t kMaxAgents = 1'000'000;
  s.n_clients = static_cast<std::uint32_t>(r.integer(m, "n_clients", "", 1, kMaxAgents));
  s.n_contractors = static_cast<std::uint32_t>(r.integer(m, "n_contractors", "", 1, kMaxAgents));
  s.duration_days = r.num(m, "duration_days", "");
  s.arrival_rate_per_hour = r.num(m, "arrival_rate_per_hour", "");
  for (std::size_t a = 0; a < kArchetypeCount; ++a) {
    s.archetype_mix[a] = r.num(m.at("archetype_mix"),
                               std::string(to_string(static_cast<Archetype>(a))), "archetype_mix.");
  }
  const Json& v = m.at("volatility");
  s.volatility.capacity_lo = r.num(v, "capacity_lo", "volatility.");
  s.volatility.capacity_hi = r.num(v, "capacity_hi", "volatility.");
  s.volatility.demand_jitter = r.num(v, "demand_jitter", "volatility.");
  s.volatility.price_jitter = r.num(v, "price_jitter", "volatility.");
  s.seed = r.seed(m, "seed", "");
  s.engine = r.engine(m.at("engine"), "engine.");
  for (std::size_t a = 0; a < kArchetypeCount; ++a) {
    const std::string name(to_string(static_cast<Archetype>(a)));
    s.archetypes[a] = r.archetype(m.at("archetypes").at(name), "archetypes." + name + ".");
  }
  for (std::size_t k = 0; k < kTaskTypeCount; ++k) {
    const std::string name(to_string(static_cast<TaskType>(k)));
    s.task_types[k] = r.task_type(m.at("task_types").at(name), "task_types." + name + ".");
  }
  s.client_hardware = r.hardware(m.at("client_hardware"), "client_hardware.");
  s.client_hardware_spread = r.num(m, "client_hardware_spread", "");
  s.market_step_h = r.num(m, "market_step_h", "");
  s.demand_ratio = r.num(m, "demand_ratio", "");
  s.initial_failure_rate = r.num(m, "initial_failure_rate", "");
  s.execution_noise_sigma = r.num(m, "execution_noise_sigma", "");
  s.input_required_prob = r.num(m, "input_required_prob", "");
  s.input_round_trip_s = r.num(m, "input_round_trip_s", "");
  s.coordination_cost_per_peer = r.num(m, "coordination_cost_per_peer", "");
  s.skill_mismatch_quality_penalty = r.num(m, "skill_mismatch_quality_penalty", "");
  s.shared_domain_similarity = r.num(m, "shared_domain_similarity", "");
  if (auto h = parse_history_sharing(m.at("history_sharing").get<std::string>())) {
    s.history_sharing = *h;
  } else {
    errors.push_back({"history_sharing", "must be one of none, reputation, full"});
  }
  if (!errors.empty()) throw InvalidInput(std::move(errors));

  auto violations = validate(s);
  if (!violations.empty()) throw InvalidInput(std::move(violations));
  return s;
}

void apply_override(Json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidInput(std::string(assignment), "override must look like key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw InvalidInput(key, "empty path segment");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

Json to_json(const CostBreakdown& c) {
  Json j = Json::object();
  for (std::size_t i = 0; i < kCostComponentCount; ++i) {
    const double v = c.parts()[i];
    if (v != 0.0) j[std::string(to_string(static_cast<CostComponent>(i)))] = v;
  }
  j["total"] = c.total();
  return j;
}

Json to_json(const WeightVector& w) {
  return {{"cost", w.cost},
          {"reliability", w.reliability},
          {"latency", w.latency},
          {"security", w.security}};
}

Json to_json(const DecisionRecord& d) {
  return {{"task_id", d.task_id},
          {"client_id", d.client_id},
          {"choice", d.outsourced_to ? Json(*d.outsourced_to) : Json("LOCAL")},
          {"topsis_score", optional_number(d.topsis_score)},
          {"confidence", d.confidence},
          {"exploration", d.exploration},
          {"reason", std::string(to_string(d.reason))},
          {"eligible_count", d.eligible_count},
          {"weights_used", to_json(d.weights_used)},
          {"internal_cost", d.internal_cost ? to_json(*d.internal_cost) : Json(nullptr)},
          {"chosen_external_cost",
           d.chosen_external_cost ? to_json(*d.chosen_external_cost) : Json(nullptr)},
          {"exploration_value", optional_number(d.exploration_value)}};
}

Json to_json(const LedgerEntry& e) {
  Json j = to_json(e.decision);
  j["task_type"] = std::string(to_string(e.task_type));
  j["arrival_h"] = e.arrival_h;
  j["completion_h"] = e.completion_h;
  j["counterfactual_local_cost"] = optional_number(e.counterfactual_local_cost);
  j["counterfactual_local_latency_s"] = e.counterfactual_local_latency_s;
  j["actual_cost"] = e.actual_cost;
  j["actual_latency_s"] = e.actual_latency_s;
  j["result"] = std::string(to_string(e.result));
  j["final_state"] = std::string(to_string(e.final_state));
  j["retried_locally"] = e.retried_locally;
  j["rejected"] = e.rejected;
  return j;
}

Json to_json(const RunMetrics& m) {
  return {{"cost_reduction_pct", optional_number(m.cost_reduction_pct)},
          {"time_savings_pct", optional_number(m.time_savings_pct)},
          {"outsourcing_rate_pct", m.outsourcing_rate_pct},
          {"exploration_rate_pct", m.exploration_rate_pct},
          {"mean_topsis_score", optional_number(m.mean_topsis_score)},
          {"throughput_tasks_per_hour", m.throughput_tasks_per_hour},
          {"success_rate_pct", m.success_rate_pct},
          {"n_decisions", m.n_decisions}};
}

Json to_json(const ReputationRecord& r) {
  return {{"contractor_id", r.contractor_id},
          {"n_success", r.n_success},
          {"n_total", r.n_total},
          {"last_update_time_h", r.last_update_time_h},
          {"estimated_failure_prob", r.estimated_failure_prob},
          {"estimated_quality_prob", r.estimated_quality_prob},
          {"estimated_security_prob", r.estimated_security_prob}};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("path", "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(source, std::string("not valid JSON: ") + e.what());
  }
}

}  // namespace coalesce
