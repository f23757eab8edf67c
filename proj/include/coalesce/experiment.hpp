#pragma once

// Multi-seed experiment series: a grid of scenario cells, each replicated
// with derived seeds, run in parallel and summarized per cell.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coalesce/io.hpp"
#include "coalesce/market_sim.hpp"
#include "coalesce/metrics.hpp"
#include "coalesce/simulation.hpp"

namespace coalesce {

enum class Series : std::uint8_t {
  duration_scaling,
  agent_scaling,
  epsilon_sweep,
  theta_sweep,
  exploration_ablation,
  single
};
std::string_view to_string(Series s);
std::optional<Series> parse_series(std::string_view s);

/// One grid cell: a named scenario preset (empty = the plan's) plus a partial
/// scenario document laid over it.
struct PlanCell {
  std::string label;
  std::string preset;
  Json overrides = Json::object();
};

struct ExperimentPlan {
  std::string name = "single";
  Series series = Series::single;
  std::string preset = "default";
  Json overrides = Json::object();  // applied to every cell before its own
  std::vector<PlanCell> grid;
  std::uint32_t replications = 20;
  std::uint64_t base_seed = 42;
  // Replication r sees the same world (population, tasks, market, outcomes)
  // in every cell; only the engine stream differs per cell.
  bool paired = true;
};

std::vector<Violation> validate(const ExperimentPlan& plan);

/// Built-in plans: single, exploration_ablation, epsilon_sweep, theta_sweep,
/// duration_scaling, agent_scaling.
std::optional<ExperimentPlan> plan_preset(std::string_view name);
std::vector<std::string> plan_preset_names();

Json to_json(const ExperimentPlan& plan);
/// Strict parse: unknown keys and bad types are violations. Cell overrides
/// are checked when the cell is resolved.
ExperimentPlan plan_from_json(const Json& doc);

/// Scenario for one cell, with `seed` still the preset's.
ScenarioConfig resolve_cell(const ExperimentPlan& plan, std::size_t cell);

struct RunSeeds {
  std::uint64_t world = 0;
  std::uint64_t engine = 0;
};
/// Distinct (cell, replication) pairs always get distinct seed pairs.
RunSeeds run_seeds(const ExperimentPlan& plan, std::size_t cell, std::uint32_t replication);

struct RunRow {
  std::size_t cell = 0;
  std::string cell_label;
  std::uint32_t replication = 0;
  std::uint64_t world_seed = 0;
  std::uint64_t engine_seed = 0;
  std::uint32_t n_clients = 0;
  std::uint32_t n_contractors = 0;
  double duration_days = 0.0;
  double epsilon = 0.0;
  double theta_skill = 0.0;
  std::optional<RunMetrics> metrics;  // empty when the run failed
  std::string error;
  friend bool operator==(const RunRow&, const RunRow&) = default;
};

struct Stat {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t n = 0;
  friend bool operator==(const Stat&, const Stat&) = default;
};
/// Empty for no values.
std::optional<Stat> describe(std::span<const double> values);

struct CellSummary {
  std::string label;
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::optional<Stat> cost_reduction_pct;
  std::optional<Stat> time_savings_pct;
  std::optional<Stat> outsourcing_rate_pct;
  std::optional<Stat> exploration_rate_pct;
  std::optional<Stat> mean_topsis_score;
  std::optional<Stat> success_rate_pct;
  std::optional<Stat> throughput_tasks_per_hour;
};

struct ExperimentSummary {
  std::vector<CellSummary> cells;
  EconomicCorrelations correlations;
};

/// Per-cell aggregates and cross-run correlations (agent count = clients +
/// contractors) over the successful rows.
ExperimentSummary summarize(std::span<const RunRow> rows, std::size_t n_cells,
                            std::span<const std::string> labels);

struct ExperimentResult {
  std::vector<RunRow> rows;  // cell-major, then replication
  ExperimentSummary summary;
  // Ledgers of the runs selected by keep_ledger, in row order.
  std::vector<std::pair<std::size_t, std::vector<LedgerEntry>>> ledgers;
};

struct RunOptions {
  unsigned jobs = 1;
  // Keep the decision ledger of replication 0 of every cell, or of every run.
  enum class Ledgers : std::uint8_t { none, first_replication, all } ledgers = Ledgers::none;
};

/// Runs every (cell, replication). A failing cell or run is recorded in its
/// rows' `error` and does not stop the rest. Results do not depend on `jobs`.
ExperimentResult run_plan(const ExperimentPlan& plan, const RunOptions& options = {});

Json to_json(const Stat& s);
Json to_json(const CellSummary& c);
Json to_json(const ExperimentSummary& s);

/// Runs table as CSV with a header row; parse_runs_csv reads it back.
std::string runs_csv(std::span<const RunRow> rows);
std::vector<RunRow> parse_runs_csv(std::string_view text);

}  // namespace coalesce
