#pragma once

// Built-in scenarios. Archetype and task-type numbers are calibration values
// chosen so the default scenario reproduces the reported aggregate behavior;
// they are not measured data.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coalesce/market_sim.hpp"

namespace coalesce {

/// 15 clients, 30 contractors, 7 days, 2.5 tasks/hour per client.
ScenarioConfig default_scenario();

/// Fixed world with no market volatility, used for the convergence check.
ScenarioConfig stationary_scenario();

/// Named scenario presets: "default", "stationary", dur_01..dur_09 and
/// agt_01..agt_08.
std::optional<ScenarioConfig> scenario_preset(std::string_view name);
std::vector<std::string> scenario_preset_names();

}  // namespace coalesce
