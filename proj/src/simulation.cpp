#include "coalesce/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace coalesce {

namespace {

struct PendingLocal {
  double start_h;
  double value;
  double t_exec_h;
};

struct LocalQueue {
  double busy_until_h = 0.0;
  std::deque<PendingLocal> pending;

  std::vector<QueuedWork> waiting_at(double now_h) {
    while (!pending.empty() && pending.front().start_h <= now_h) pending.pop_front();
    std::vector<QueuedWork> out;
    out.reserve(pending.size());
    for (const auto& p : pending) out.push_back({p.value, p.t_exec_h});
    return out;
  }

  double wait_s(double now_h) const { return std::max(0.0, busy_until_h - now_h) * kSecondsPerHour; }
};

struct Completion {
  double time_h;
  std::size_t ledger_index;
  ContractorId contractor;
  Outcome result;
  double billed;
  double billable_estimate;
};

struct CompletionOrder {
  bool operator()(const Completion& a, const Completion& b) const {
    if (a.time_h != b.time_h) return a.time_h > b.time_h;
    return a.ledger_index > b.ledger_index;
  }
};

}  // namespace

std::uint64_t default_engine_seed(std::uint64_t scenario_seed) {
  return derive_seed(scenario_seed, {stream::engine});
}

RunResult run_simulation(const ScenarioConfig& s, std::uint64_t engine_seed) {
  if (auto v = validate(s); !v.empty()) {
    std::ostringstream os;
    os << "invalid scenario:";
    for (const auto& x : v) os << ' ' << x.field << ": " << x.message << ';';
    throw std::invalid_argument(os.str());
  }

  RunResult result;
  result.world_seed = s.seed;
  result.engine_seed = engine_seed;

  Rng population_rng(derive_seed(s.seed, {stream::population}));
  Rng arrival_rng(derive_seed(s.seed, {stream::arrivals}));
  Rng market_rng(derive_seed(s.seed, {stream::market}));

  result.population = generate_population(s, population_rng);
  const std::vector<Task> tasks = generate_tasks(s, arrival_rng);
  const auto& clients = result.population.clients;
  std::vector<ContractorProfile> contractors = result.population.contractors;

  EngineConfig cfg = s.engine;
  cfg.protocol_overhead_cost +=
      s.coordination_cost_per_peer * static_cast<double>(s.n_contractors);

  MarketState market = initial_market(s, contractors);
  ReputationLedger market_reputation(cfg);
  std::vector<DecisionHistory> histories;
  histories.reserve(s.n_clients);
  const bool pooled = s.history_sharing == HistorySharing::full;
  for (std::uint32_t c = 0; c < (pooled ? 1 : s.n_clients); ++c) {
    if (s.history_sharing == HistorySharing::reputation) {
      histories.emplace_back(cfg, market_reputation);
    } else {
      histories.emplace_back(cfg);
    }
  }
  auto history_of = [&](ClientId c) -> DecisionHistory& { return histories[pooled ? 0 : c]; };
  std::vector<LocalQueue> queues(s.n_clients);
  std::priority_queue<Completion, std::vector<Completion>, CompletionOrder> completions;

  const ExecutionOptions exec_opts{s.execution_noise_sigma, s.input_required_prob,
                                   s.input_round_trip_s, cfg.gamma_impact,
                                   s.skill_mismatch_quality_penalty};
  auto& ledger = result.ledger;
  ledger.reserve(tasks.size());

  auto deliver = [&](const Completion& c) {
    LedgerEntry& e = ledger[c.ledger_index];
    const Task& task = tasks[e.decision.task_id];
    DecisionHistory& h = history_of(task.client);
    h.record_outcome(c.contractor, task.task_type, c.result, c.time_h);
    market.failure_rate = cfg.ewma_lambda * (c.result == Outcome::failure ? 1.0 : 0.0) +
                          (1.0 - cfg.ewma_lambda) * market.failure_rate;

    const CalibrationEntry before = h.calibration().update(
        {static_cast<std::int64_t>(c.contractor), task.task_type}, c.billable_estimate, c.billed,
        cfg.ewma_lambda);
    if (e.decision.exploration && e.decision.chosen_external_cost) {
      const double info = std::abs(before.estimate - c.billed);
      e.decision.exploration_value =
          e.decision.chosen_external_cost->total() + cfg.learning_value_weight * info;
    }

    if (c.result == Outcome::failure) {
      // Retry on local hardware once the failure is known.
      LocalQueue& q = queues[task.client];
      const double t_exec_h = execution_hours(task, clients[task.client].hardware);
      const double start_h = std::max(c.time_h, q.busy_until_h);
      const double finish_h = start_h + t_exec_h;
      q.busy_until_h = finish_h;
      q.pending.push_back({start_h, task.value, t_exec_h});
      e.retried_locally = true;
      e.actual_cost += e.counterfactual_local_cost.value_or(0.0);
      e.actual_latency_s = (finish_h - task.arrival_time_h) * kSecondsPerHour;
      e.completion_h = finish_h;
      e.final_state = LifecycleState::completed;
    }
  };

  auto deliver_until = [&](double t_h) {
    while (!completions.empty() && completions.top().time_h <= t_h) {
      const Completion c = completions.top();
      completions.pop();
      deliver(c);
    }
  };

  double next_market_h = s.market_step_h;
  for (const Task& task : tasks) {
    while (next_market_h <= task.arrival_time_h) {
      deliver_until(next_market_h);
      market = step_market(market, contractors, s.volatility, market_rng);
      next_market_h += s.market_step_h;
    }
    deliver_until(task.arrival_time_h);

    const double now = task.arrival_time_h;
    const ClientProfile& client = clients[task.client];
    DecisionHistory& history = history_of(task.client);
    LocalQueue& queue = queues[task.client];
    const std::vector<QueuedWork> waiting = queue.waiting_at(now);

    LedgerEntry entry;
    entry.task_type = task.task_type;
    entry.arrival_h = now;
    const double t_exec_local_h = execution_hours(task, client.hardware);
    const double wait_s = queue.wait_s(now);
    entry.counterfactual_local_latency_s = wait_s + t_exec_local_h * kSecondsPerHour;

    Rng engine_rng(derive_seed(engine_seed, {stream::engine, task.id}));
    Rng outcome_rng(derive_seed(s.seed, {stream::outcomes, task.id}));
    const DecisionContext ctx{task, contractors, market, history, client.hardware, waiting, now};

    try {
      entry.decision = decide(ctx, cfg, engine_rng);
    } catch (const NoFeasibleExecutor&) {
      entry.decision.task_id = task.id;
      entry.decision.client_id = task.client;
      entry.rejected = true;
      entry.final_state = LifecycleState::failed;
      entry.completion_h = now;
      ledger.push_back(std::move(entry));
      continue;
    }
    const DecisionRecord& d = entry.decision;
    if (d.internal_cost) entry.counterfactual_local_cost = d.internal_cost->total();
    if (!d.exploration && d.topsis_score) history.observe_weights(d.weights_used);

    if (d.is_local()) {
      const ExecutionOutcome out = execute_task(
          task, LocalExecutor{&client.hardware, *d.internal_cost, wait_s}, now, exec_opts,
          outcome_rng);
      const double begin_h = now + wait_s / kSecondsPerHour;
      queue.busy_until_h = begin_h + t_exec_local_h;
      queue.pending.push_back({begin_h, task.value, t_exec_local_h});
      entry.actual_cost = out.actual_cost;
      entry.actual_latency_s = out.actual_latency_s;
      entry.result = out.result;
      entry.final_state = out.lifecycle.state();
      entry.completion_h = out.lifecycle.history().back().time_h;
      ledger.push_back(std::move(entry));
      continue;
    }

    const ContractorProfile& chosen = contractors[*d.outsourced_to];
    const CostBreakdown& estimate = *d.chosen_external_cost;
    const ExecutionOutcome out =
        execute_task(task, ContractorExecutor{&chosen, estimate}, now, exec_opts, outcome_rng);
    entry.actual_cost = out.actual_cost;
    entry.actual_latency_s = out.actual_latency_s;
    entry.result = out.result;
    entry.final_state = out.lifecycle.state();
    entry.completion_h = out.lifecycle.history().back().time_h;
    ledger.push_back(std::move(entry));
    completions.push({out.lifecycle.history().back().time_h, ledger.size() - 1, chosen.id,
                      out.result, out.billed_cost, billable(estimate)});
  }
  deliver_until(std::numeric_limits<double>::infinity());

  const double duration_h = s.duration_days * 24.0;
  result.metrics = compute_metrics(ledger, duration_h);
  result.reputation.reserve(histories.size());
  for (const auto& h : histories) {
    std::vector<ReputationRecord> recs;
    for (const auto& [id, r] : h.reputation().records()) recs.push_back(r);
    result.reputation.push_back(std::move(recs));
  }
  return result;
}

}  // namespace coalesce
