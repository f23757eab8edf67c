#pragma once

// Single-threaded event loop tying the market, the per-client decision
// engines, execution and the ledger together.

#include <cstdint>
#include <vector>

#include "coalesce/decision_engine.hpp"
#include "coalesce/market_sim.hpp"
#include "coalesce/metrics.hpp"

namespace coalesce {

struct RunResult {
  std::uint64_t world_seed = 0;
  std::uint64_t engine_seed = 0;
  Population population;
  std::vector<LedgerEntry> ledger;
  RunMetrics metrics;
  // Final reputation ledgers, one per history: per client, or a single
  // pooled one under full sharing.
  std::vector<std::vector<ReputationRecord>> reputation;
};

/// Runs one scenario. `scenario.seed` drives the world (population, arrivals,
/// market path, execution outcomes); `engine_seed` drives exploration. Each
/// task gets its own sub-stream keyed by task id, so two runs that differ only
/// in engine settings see the same world.
RunResult run_simulation(const ScenarioConfig& scenario, std::uint64_t engine_seed);

/// Engine seed used when a caller supplies only a scenario seed.
std::uint64_t default_engine_seed(std::uint64_t scenario_seed);

}  // namespace coalesce
