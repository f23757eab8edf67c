#pragma once

// JSON documents for scenarios, decision logs and metrics, plus the CSV
// number format. Scenario documents are partial: any field left out keeps
// the value of the base scenario, and unknown fields are rejected.

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coalesce/market_sim.hpp"
#include "coalesce/metrics.hpp"
#include "coalesce/simulation.hpp"

namespace coalesce {

using Json = nlohmann::ordered_json;

/// Input that fails to parse or validate. Carries every field-level problem.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(std::vector<Violation> violations);
  InvalidInput(std::string field, std::string message)
      : InvalidInput(std::vector<Violation>{{std::move(field), std::move(message)}}) {}
  std::vector<Violation> violations;
};

Json to_json(const HardwareSpec& hw);
Json to_json(const EngineConfig& config);
Json to_json(const ScenarioConfig& scenario);

/// Overlays `doc` on `base` and validates the result. Throws InvalidInput
/// listing unknown fields, type errors and failed invariants.
ScenarioConfig scenario_from_json(const Json& doc, const ScenarioConfig& base);

/// Applies one `dotted.path=value` override to a document. The value is read
/// as JSON when it parses, otherwise as a string. Throws InvalidInput when
/// the text has no '='.
void apply_override(Json& doc, std::string_view assignment);

Json to_json(const CostBreakdown& cost);
Json to_json(const WeightVector& w);
Json to_json(const DecisionRecord& d);
Json to_json(const LedgerEntry& e);
Json to_json(const RunMetrics& m);
Json to_json(const ReputationRecord& r);

/// Shortest text that reads back as the same double; empty for NaN.
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

/// Reads a whole file; throws InvalidInput (field "path") when it cannot.
std::string read_file(const std::string& path);
/// Parses JSON text; syntax errors become InvalidInput.
Json parse_json(const std::string& text, const std::string& source);

}  // namespace coalesce
