#pragma once

// The outsourcing decision: skill gating, criteria matrix, market-adaptive and
// correlation-adjusted weights, TOPSIS ranking, reservation-price check,
// confidence, and epsilon-greedy exploration in front of all of it.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coalesce/cost_model.hpp"
#include "coalesce/random.hpp"
#include "coalesce/reputation.hpp"
#include "coalesce/types.hpp"

namespace coalesce {

/// Column order of the criteria matrix.
enum class Criterion : std::uint8_t { cost = 0, reliability = 1, latency = 2, security = 3 };
inline constexpr std::size_t kCriterionCount = 4;
/// true where larger is better. Only reliability is a benefit criterion.
inline constexpr std::array<bool, kCriterionCount> kBenefitCriterion = {false, true, false, false};

using CriteriaRow = std::array<double, kCriterionCount>;

struct CriteriaMatrix {
  std::vector<ContractorId> ids;  // one per row
  std::vector<CriteriaRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  void add(ContractorId id, const CriteriaRow& row) {
    ids.push_back(id);
    rows.push_back(row);
  }
};

struct OutcomeCounts {
  std::uint64_t successes = 0;
  std::uint64_t total = 0;
  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

/// Everything one client has learned: per (contractor, task type) outcome
/// counts, the running historical weight vector, its reputation ledger and
/// its cost calibration.
class DecisionHistory {
 public:
  explicit DecisionHistory(const EngineConfig& config)
      : config_(config), own_reputation_(config), reputation_(&own_reputation_) {}
  /// Keeps its own outcome counts but reads and feeds a reputation ledger
  /// shared with other clients. `shared` must outlive this object.
  DecisionHistory(const EngineConfig& config, ReputationLedger& shared)
      : config_(config), own_reputation_(config), reputation_(&shared) {}
  DecisionHistory(const DecisionHistory& o)
      : config_(o.config_), outcomes_(o.outcomes_), historical_weights_(o.historical_weights_),
        own_reputation_(o.own_reputation_),
        reputation_(o.reputation_ == &o.own_reputation_ ? &own_reputation_ : o.reputation_),
        calibration_(o.calibration_) {}
  DecisionHistory& operator=(const DecisionHistory&) = delete;

  /// Counts the outcome for (contractor, type) and updates reputation.
  void record_outcome(ContractorId contractor, TaskType type, Outcome outcome, double now_h);

  OutcomeCounts counts(ContractorId contractor, TaskType type) const;
  /// Success fraction for (contractor, type); empty without history.
  std::optional<double> performance(ContractorId contractor, TaskType type) const;

  const WeightVector& historical_weights() const { return historical_weights_; }
  /// EWMA (ewma_lambda) of the weights actually used in past decisions.
  void observe_weights(const WeightVector& used);

  const ReputationLedger& reputation() const { return *reputation_; }
  CalibrationState& calibration() { return calibration_; }
  const CalibrationState& calibration() const { return calibration_; }

 private:
  EngineConfig config_;
  std::map<std::pair<ContractorId, TaskType>, OutcomeCounts> outcomes_;
  WeightVector historical_weights_{};
  ReputationLedger own_reputation_;
  ReputationLedger* reputation_;
  CalibrationState calibration_;
};

/// Historical performance used when a pair has no history.
inline constexpr double kDefaultHistoricalPerformance = 0.5;

double jaccard(const SkillSet& a, const SkillSet& b);
/// Throws std::invalid_argument on dimension mismatch; 0 for zero vectors.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Weighted blend of skill-set overlap, embedding similarity (clamped at 0)
/// and historical performance.
double skill_compatibility(const ContractorProfile& contractor, const Task& task,
                           double historical_performance, const SkillWeights& weights = {});
double skill_compatibility(const ContractorProfile& contractor, const Task& task,
                           const DecisionHistory& history, const SkillWeights& weights = {});

/// Blends market/task signals with historical weights (factor beta) and
/// normalizes. Signals: market pressure, market failure rate, task urgency,
/// task data sensitivity.
WeightVector dynamic_weights(const MarketState& market, const Task& task,
                             const WeightVector& historical, double beta_market);
WeightVector dynamic_weights(const MarketState& market, const Task& task,
                             const DecisionHistory& history, double beta_market);

/// Normalizes to the simplex; all-zero input gives uniform weights.
WeightVector normalize(const WeightVector& w);

/// Pearson correlation of two equal-length columns; 0 when either column has
/// zero variance or fewer than two samples exist.
double pearson(std::span<const double> x, std::span<const double> y);

/// w'_i = w_i * max(0, 1 - alpha * sum_{j != i} |rho_ij|), renormalized.
WeightVector correlation_adjust(const WeightVector& weights, const CriteriaMatrix& matrix,
                                double alpha_corr);

/// TOPSIS closeness coefficients, one per row. Throws std::invalid_argument on
/// an empty matrix. Rows equidistant from ideal and anti-ideal at distance 0
/// (degenerate) score 0.5.
std::vector<double> topsis(const CriteriaMatrix& matrix, const WeightVector& weights);
inline constexpr double kDegenerateTopsisScore = 0.5;

/// Index of the best score; ties go to the lowest contractor id.
std::size_t argmax_score(const CriteriaMatrix& matrix, std::span<const double> scores);

enum class NashVerdict : std::uint8_t { accept, reject };

/// Outsource only strictly below the client's reservation price (its
/// internal cost).
NashVerdict nash_reservation_check(const CostBreakdown& internal,
                                   const CostBreakdown& best_external);

/// 1 - z * sqrt(p (1 - p)) / sqrt(n), clamped to [0, 1]; n = 0 gives 0.5 and
/// p in {0, 1} gives 1.
double decision_confidence(const OutcomeCounts& counts, double z_alpha_half);
double decision_confidence(const DecisionHistory& history, const Task& task,
                           ContractorId candidate, double z_alpha_half);

inline constexpr double kExplorationConfidence = 0.7;
inline constexpr double kExplorationScore = 0.5;

/// Local execution is infeasible and no contractor qualifies.
class NoFeasibleExecutor : public std::runtime_error {
 public:
  explicit NoFeasibleExecutor(TaskId id);
  TaskId task_id;
};

struct DecisionContext {
  const Task& task;
  std::span<const ContractorProfile> candidates;
  const MarketState& market;
  const DecisionHistory& history;
  const HardwareSpec& local_hardware;
  std::span<const QueuedWork> local_queue;
  double now_h = 0.0;
};

/// Contractors whose hardware can hold the task's working set. This is the
/// basic compatibility check applied even to exploratory picks.
bool can_host(const ContractorProfile& contractor, const Task& task);

/// Criteria row (external cost, reliability, latency, security risk) for one
/// contractor, with the external cost breakdown it was built from.
std::pair<CriteriaRow, CostBreakdown> evaluate_candidate(const DecisionContext& ctx,
                                                         const ContractorProfile& contractor,
                                                         const EngineConfig& config);

/// Full decision. Consumes exactly one uniform variate from `rng`, plus one
/// more when exploring. Throws NoFeasibleExecutor when neither local
/// execution nor any contractor is possible.
DecisionRecord decide(const DecisionContext& ctx, const EngineConfig& config, Rng& rng);

}  // namespace coalesce
