#include "coalesce/decision_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coalesce {

void DecisionHistory::record_outcome(ContractorId contractor, TaskType type, Outcome outcome,
                                     double now_h) {
  auto& c = outcomes_[{contractor, type}];
  ++c.total;
  if (outcome == Outcome::success) ++c.successes;
  reputation_->record(contractor, outcome, now_h);
}

OutcomeCounts DecisionHistory::counts(ContractorId contractor, TaskType type) const {
  auto it = outcomes_.find({contractor, type});
  return it == outcomes_.end() ? OutcomeCounts{} : it->second;
}

std::optional<double> DecisionHistory::performance(ContractorId contractor, TaskType type) const {
  const OutcomeCounts c = counts(contractor, type);
  if (c.total == 0) return std::nullopt;
  return static_cast<double>(c.successes) / static_cast<double>(c.total);
}

void DecisionHistory::observe_weights(const WeightVector& used) {
  const double l = config_.ewma_lambda;
  auto h = historical_weights_.as_array();
  const auto u = used.as_array();
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = l * u[i] + (1.0 - l) * h[i];
  historical_weights_ = normalize(WeightVector::from_array(h));
}

double jaccard(const SkillSet& a, const SkillSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double skill_compatibility(const ContractorProfile& contractor, const Task& task,
                           double historical_performance, const SkillWeights& w) {
  const double onto = jaccard(contractor.skills, task.required_skills);
  const double emb =
      std::max(0.0, cosine_similarity(contractor.skill_embedding, task.requirement_embedding));
  return w.ontological * onto + w.embedding * emb + w.performance * historical_performance;
}

double skill_compatibility(const ContractorProfile& contractor, const Task& task,
                           const DecisionHistory& history, const SkillWeights& w) {
  const double perf = history.performance(contractor.id, task.task_type)
                          .value_or(kDefaultHistoricalPerformance);
  return skill_compatibility(contractor, task, perf, w);
}

WeightVector normalize(const WeightVector& w) {
  const double s = w.sum();
  if (!(s > 0.0) || !std::isfinite(s)) return WeightVector{};
  return {w.cost / s, w.reliability / s, w.latency / s, w.security / s};
}

WeightVector dynamic_weights(const MarketState& market, const Task& task,
                             const WeightVector& historical, double beta) {
  const WeightVector raw{
      beta * market.market_pressure + (1.0 - beta) * historical.cost,
      beta * market.failure_rate + (1.0 - beta) * historical.reliability,
      beta * task.urgency + (1.0 - beta) * historical.latency,
      beta * task.data_sensitivity + (1.0 - beta) * historical.security,
  };
  return normalize(raw);
}

WeightVector dynamic_weights(const MarketState& market, const Task& task,
                             const DecisionHistory& history, double beta) {
  return dynamic_weights(market, task, history.historical_weights(), beta);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0.0;
  const double mx = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
                    static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
                    static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

WeightVector correlation_adjust(const WeightVector& weights, const CriteriaMatrix& matrix,
                                double alpha) {
  std::array<std::vector<double>, kCriterionCount> cols;
  for (std::size_t j = 0; j < kCriterionCount; ++j) {
    cols[j].reserve(matrix.size());
    for (const auto& row : matrix.rows) cols[j].push_back(row[j]);
  }
  const auto w = weights.as_array();
  std::array<double, kCriterionCount> adjusted{};
  for (std::size_t i = 0; i < kCriterionCount; ++i) {
    double penalty = 0.0;
    for (std::size_t j = 0; j < kCriterionCount; ++j) {
      if (j != i) penalty += std::abs(pearson(cols[i], cols[j]));
    }
    adjusted[i] = w[i] * std::max(0.0, 1.0 - alpha * penalty);
  }
  const WeightVector out = WeightVector::from_array(adjusted);
  // Every criterion fully penalized: keep the unadjusted weights.
  if (!(out.sum() > 0.0)) return normalize(weights);
  return normalize(out);
}

std::vector<double> topsis(const CriteriaMatrix& matrix, const WeightVector& weights) {
  if (matrix.empty()) throw std::invalid_argument("TOPSIS needs at least one row");
  const std::size_t m = matrix.size();
  const auto w = weights.as_array();

  std::array<double, kCriterionCount> norm{};
  for (const auto& row : matrix.rows) {
    for (std::size_t j = 0; j < kCriterionCount; ++j) norm[j] += row[j] * row[j];
  }
  for (double& n : norm) n = std::sqrt(n);

  std::vector<CriteriaRow> v(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < kCriterionCount; ++j) {
      const double r = norm[j] > 0.0 ? matrix.rows[i][j] / norm[j] : 0.0;
      v[i][j] = w[j] * r;
    }
  }

  CriteriaRow ideal = v[0];
  CriteriaRow anti = v[0];
  for (const auto& row : v) {
    for (std::size_t j = 0; j < kCriterionCount; ++j) {
      if (kBenefitCriterion[j]) {
        ideal[j] = std::max(ideal[j], row[j]);
        anti[j] = std::min(anti[j], row[j]);
      } else {
        ideal[j] = std::min(ideal[j], row[j]);
        anti[j] = std::max(anti[j], row[j]);
      }
    }
  }

  std::vector<double> scores(m);
  for (std::size_t i = 0; i < m; ++i) {
    double dp = 0.0, dn = 0.0;
    for (std::size_t j = 0; j < kCriterionCount; ++j) {
      dp += (v[i][j] - ideal[j]) * (v[i][j] - ideal[j]);
      dn += (v[i][j] - anti[j]) * (v[i][j] - anti[j]);
    }
    dp = std::sqrt(dp);
    dn = std::sqrt(dn);
    scores[i] = (dp + dn) > 0.0 ? dn / (dp + dn) : kDegenerateTopsisScore;
  }
  return scores;
}

std::size_t argmax_score(const CriteriaMatrix& matrix, std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && matrix.ids[i] < matrix.ids[best])) {
      best = i;
    }
  }
  return best;
}

NashVerdict nash_reservation_check(const CostBreakdown& internal,
                                   const CostBreakdown& best_external) {
  return best_external.total() < internal.total() ? NashVerdict::accept : NashVerdict::reject;
}

double decision_confidence(const OutcomeCounts& c, double z) {
  if (c.total == 0) return 0.5;
  if (c.successes == 0 || c.successes == c.total) return 1.0;
  const double n = static_cast<double>(c.total);
  const double p = static_cast<double>(c.successes) / n;
  return std::clamp(1.0 - z * std::sqrt(p * (1.0 - p)) / std::sqrt(n), 0.0, 1.0);
}

double decision_confidence(const DecisionHistory& history, const Task& task,
                           ContractorId candidate, double z) {
  return decision_confidence(history.counts(candidate, task.task_type), z);
}

NoFeasibleExecutor::NoFeasibleExecutor(TaskId id)
    : std::runtime_error("task " + std::to_string(id) +
                         " cannot run locally and no contractor qualifies"),
      task_id(id) {}

bool can_host(const ContractorProfile& contractor, const Task& task) {
  return task.memory_demand_bytes() <= contractor.hardware.mem_total_bytes;
}

std::pair<CriteriaRow, CostBreakdown> evaluate_candidate(const DecisionContext& ctx,
                                                         const ContractorProfile& contractor,
                                                         const EngineConfig& config) {
  const ReputationRecord rep = ctx.history.reputation().get(contractor.id);
  CostBreakdown ext =
      external_cost(ctx.task, contractor, ctx.market, rep.risk_estimates(), config);
  const CriteriaRow row{ext.total(), reliability(rep, ctx.now_h, config.decay_lambda_per_month),
                        estimated_latency_s(ctx.task, contractor),
                        security_risk(contractor, ctx.task)};
  return {row, ext};
}

DecisionRecord decide(const DecisionContext& ctx, const EngineConfig& config, Rng& rng) {
  DecisionRecord rec;
  rec.task_id = ctx.task.id;
  rec.client_id = ctx.task.client;

  // Phase 1: internal cost (reservation price) and the candidate pools.
  try {
    rec.internal_cost = internal_cost(ctx.task, ctx.local_hardware, ctx.local_queue);
  } catch (const InfeasibleLocal&) {
    rec.internal_cost.reset();
  }
  const bool local_ok = rec.internal_cost.has_value();

  std::vector<const ContractorProfile*> pool;
  std::vector<const ContractorProfile*> eligible;
  for (const auto& c : ctx.candidates) {
    if (!can_host(c, ctx.task)) continue;
    pool.push_back(&c);
    if (skill_compatibility(c, ctx.task, ctx.history, config.skill_weights) >=
        config.theta_skill) {
      eligible.push_back(&c);
    }
  }
  rec.eligible_count = eligible.size();

  // Phase 2: epsilon-greedy exploration ahead of the TOPSIS evaluation.
  const double coin = rng.uniform();
  if (coin < config.epsilon && !pool.empty()) {
    const ContractorProfile& pick = *pool[rng.index(pool.size())];
    auto [row, ext] = evaluate_candidate(ctx, pick, config);
    rec.outsourced_to = pick.id;
    rec.exploration = true;
    rec.confidence = kExplorationConfidence;
    rec.topsis_score = kExplorationScore;
    rec.reason = DecisionReason::exploration;
    rec.exploration_value = ext.total();
    rec.chosen_external_cost = ext;
    rec.weights_used = dynamic_weights(ctx.market, ctx.task, ctx.history, config.beta_market);
    return rec;
  }

  if (eligible.empty()) {
    if (!local_ok) throw NoFeasibleExecutor(ctx.task.id);
    rec.reason = ctx.candidates.empty() ? DecisionReason::no_candidates
                                        : DecisionReason::no_eligible;
    rec.weights_used = dynamic_weights(ctx.market, ctx.task, ctx.history, config.beta_market);
    return rec;
  }

  // Criteria matrix over the skill-eligible contractors.
  CriteriaMatrix matrix;
  std::vector<CostBreakdown> externals;
  externals.reserve(eligible.size());
  for (const ContractorProfile* c : eligible) {
    auto [row, ext] = evaluate_candidate(ctx, *c, config);
    matrix.add(c->id, row);
    externals.push_back(ext);
  }

  // Phase 2 (weights) and 3 (TOPSIS).
  const WeightVector market_weights =
      dynamic_weights(ctx.market, ctx.task, ctx.history, config.beta_market);
  const WeightVector weights = correlation_adjust(market_weights, matrix, config.alpha_corr);
  rec.weights_used = weights;
  const std::vector<double> scores = topsis(matrix, weights);
  const std::size_t best = argmax_score(matrix, scores);
  rec.topsis_score = scores[best];

  // Phase 4 and 5: reservation price and confidence.
  const CostBreakdown& best_ext = externals[best];
  const bool nash_ok =
      !local_ok || nash_reservation_check(*rec.internal_cost, best_ext) == NashVerdict::accept;
  rec.confidence = decision_confidence(ctx.history, ctx.task, matrix.ids[best],
                                       config.z_alpha_half);

  if (!local_ok) {
    rec.outsourced_to = matrix.ids[best];
    rec.chosen_external_cost = best_ext;
    rec.reason = DecisionReason::forced_outsource;
    return rec;
  }
  if (!(*rec.topsis_score > config.tau_threshold)) {
    rec.reason = DecisionReason::below_threshold;
  } else if (!(rec.confidence > config.rho_min)) {
    rec.reason = DecisionReason::low_confidence;
  } else if (!nash_ok) {
    rec.reason = DecisionReason::nash_reject;
  } else {
    rec.outsourced_to = matrix.ids[best];
    rec.chosen_external_cost = best_ext;
    rec.reason = DecisionReason::outsource;
  }
  return rec;
}

}  // namespace coalesce
