#include "coalesce/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace coalesce {

std::optional<double> cost_reduction(std::span<const LedgerEntry> ledger) {
  double baseline = 0.0, actual = 0.0;
  for (const auto& e : ledger) {
    if (e.rejected || !e.counterfactual_local_cost) continue;
    baseline += *e.counterfactual_local_cost;
    actual += e.actual_cost;
  }
  if (baseline == 0.0) return std::nullopt;
  return 100.0 * (baseline - actual) / baseline;
}

std::optional<double> time_savings(std::span<const LedgerEntry> ledger) {
  double baseline = 0.0, actual = 0.0;
  for (const auto& e : ledger) {
    if (e.rejected || !e.counterfactual_local_cost) continue;
    baseline += e.counterfactual_local_latency_s;
    actual += e.actual_latency_s;
  }
  if (baseline == 0.0) return std::nullopt;
  return 100.0 * (baseline - actual) / baseline;
}

RunMetrics compute_metrics(std::span<const LedgerEntry> ledger, double duration_h) {
  RunMetrics m;
  m.n_decisions = ledger.size();
  m.cost_reduction_pct = cost_reduction(ledger);
  m.time_savings_pct = time_savings(ledger);
  if (ledger.empty()) return m;

  std::uint64_t outsourced = 0, explored = 0, completed = 0, scored = 0;
  double score_sum = 0.0;
  for (const auto& e : ledger) {
    if (!e.decision.is_local()) ++outsourced;
    if (e.decision.exploration) ++explored;
    if (e.final_state == LifecycleState::completed) ++completed;
    if (e.decision.topsis_score) {
      ++scored;
      score_sum += *e.decision.topsis_score;
    }
  }
  const double n = static_cast<double>(ledger.size());
  m.outsourcing_rate_pct = 100.0 * static_cast<double>(outsourced) / n;
  m.exploration_rate_pct = 100.0 * static_cast<double>(explored) / n;
  m.success_rate_pct = 100.0 * static_cast<double>(completed) / n;
  if (scored) m.mean_topsis_score = score_sum / static_cast<double>(scored);
  if (duration_h > 0.0) m.throughput_tasks_per_hour = static_cast<double>(completed) / duration_h;
  return m;
}

std::optional<double> pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson_r: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

EconomicCorrelations correlations(std::span<const RunPoint> runs) {
  std::vector<double> agents, outsourcing, reduction;
  for (const auto& r : runs) {
    agents.push_back(r.agent_count);
    outsourcing.push_back(r.outsourcing_rate_pct);
    reduction.push_back(r.cost_reduction_pct);
  }
  return {pearson_r(outsourcing, reduction), pearson_r(agents, reduction)};
}

std::int64_t choice_label(const DecisionRecord& d) {
  return d.outsourced_to ? static_cast<std::int64_t>(*d.outsourced_to) : -1;
}

double total_variation(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("total_variation: empty sample");
  std::map<std::int64_t, std::pair<double, double>> freq;
  for (auto x : a) freq[x].first += 1.0;
  for (auto x : b) freq[x].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double l1 = 0.0;
  for (const auto& [label, f] : freq) l1 += std::abs(f.first / na - f.second / nb);
  return 0.5 * l1;
}

std::vector<double> convergence_diagnostic(std::span<const std::int64_t> choices,
                                           std::size_t window) {
  if (window == 0 || choices.size() < 2 * window) {
    throw std::invalid_argument("convergence_diagnostic needs at least two full windows");
  }
  const std::size_t k = choices.size() / window;
  std::vector<double> tv;
  tv.reserve(k - 1);
  for (std::size_t w = 0; w + 1 < k; ++w) {
    tv.push_back(total_variation(choices.subspan(w * window, window),
                                 choices.subspan((w + 1) * window, window)));
  }
  return tv;
}

}  // namespace coalesce
