#include "coalesce/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <thread>

#include "coalesce/presets.hpp"
#include "coalesce/random.hpp"

namespace coalesce {

std::string_view to_string(Series s) {
  switch (s) {
    case Series::duration_scaling: return "duration_scaling";
    case Series::agent_scaling: return "agent_scaling";
    case Series::epsilon_sweep: return "epsilon_sweep";
    case Series::theta_sweep: return "theta_sweep";
    case Series::exploration_ablation: return "exploration_ablation";
    case Series::single: return "single";
  }
  return "single";
}

std::optional<Series> parse_series(std::string_view s) {
  for (Series x : {Series::duration_scaling, Series::agent_scaling, Series::epsilon_sweep,
                   Series::theta_sweep, Series::exploration_ablation, Series::single}) {
    if (s == to_string(x)) return x;
  }
  return std::nullopt;
}

std::vector<Violation> validate(const ExperimentPlan& plan) {
  std::vector<Violation> out;
  if (plan.replications < 1) out.push_back({"replications", "must be >= 1"});
  if (plan.grid.empty()) out.push_back({"grid", "must have at least one cell"});
  if (!scenario_preset(plan.preset)) out.push_back({"preset", "unknown preset " + plan.preset});
  for (std::size_t i = 0; i < plan.grid.size(); ++i) {
    const auto& c = plan.grid[i];
    const std::string p = "grid[" + std::to_string(i) + "]";
    if (c.label.empty()) out.push_back({p + ".label", "must not be empty"});
    if (!c.preset.empty() && !scenario_preset(c.preset)) {
      out.push_back({p + ".preset", "unknown preset " + c.preset});
    }
    if (!c.overrides.is_object()) out.push_back({p + ".overrides", "expected an object"});
  }
  return out;
}

namespace {

PlanCell engine_cell(const char* prefix, const char* key, double v) {
  PlanCell c;
  c.label = std::string(prefix) + "_" + format_number(v);
  c.overrides = {{"engine", {{key, v}}}};
  return c;
}

}  // namespace

std::optional<ExperimentPlan> plan_preset(std::string_view name) {
  ExperimentPlan p;
  p.name = std::string(name);
  if (name == "single") {
    p.series = Series::single;
    p.grid.push_back({"default", "", Json::object()});
  } else if (name == "exploration_ablation") {
    p.series = Series::exploration_ablation;
    p.grid.push_back(engine_cell("epsilon", "epsilon", 0.0));
    p.grid.push_back(engine_cell("epsilon", "epsilon", 0.1));
  } else if (name == "epsilon_sweep") {
    p.series = Series::epsilon_sweep;
    for (double e : {0.05, 0.1, 0.15, 0.2, 0.25}) {
      p.grid.push_back(engine_cell("epsilon", "epsilon", e));
    }
  } else if (name == "theta_sweep") {
    p.series = Series::theta_sweep;
    for (double t : {0.5, 0.6, 0.7, 0.8, 0.9}) {
      p.grid.push_back(engine_cell("theta", "theta_skill", t));
    }
  } else if (name == "duration_scaling" || name == "agent_scaling") {
    const bool dur = name == "duration_scaling";
    p.series = dur ? Series::duration_scaling : Series::agent_scaling;
    for (const auto& preset : scenario_preset_names()) {
      if (preset.starts_with(dur ? "dur_" : "agt_")) {
        p.grid.push_back({preset, preset, Json::object()});
      }
    }
  } else {
    return std::nullopt;
  }
  return p;
}

std::vector<std::string> plan_preset_names() {
  return {"single",          "exploration_ablation", "epsilon_sweep",
          "theta_sweep",     "duration_scaling",     "agent_scaling"};
}

Json to_json(const ExperimentPlan& plan) {
  Json grid = Json::array();
  for (const auto& c : plan.grid) {
    grid.push_back({{"label", c.label}, {"preset", c.preset}, {"overrides", c.overrides}});
  }
  return {{"name", plan.name},
          {"series", std::string(to_string(plan.series))},
          {"preset", plan.preset},
          {"overrides", plan.overrides},
          {"grid", grid},
          {"replications", plan.replications},
          {"base_seed", plan.base_seed},
          {"paired", plan.paired}};
}

ExperimentPlan plan_from_json(const Json& doc) {
  std::vector<Violation> errors;
  if (!doc.is_object()) throw InvalidInput("<root>", "expected an object");
  ExperimentPlan p;
  auto string_field = [&](const Json& j, const char* key, const std::string& path,
                          std::string& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) {
      errors.push_back({path + key, "expected a string"});
      return;
    }
    out = j.at(key).get<std::string>();
  };
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const char* known[] = {"name",  "series",       "preset",    "overrides",
                                  "grid",  "replications", "base_seed", "paired"};
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return it.key() == k; }) == std::end(known)) {
      errors.push_back({it.key(), "unknown field"});
    }
  }
  string_field(doc, "name", "", p.name);
  if (doc.contains("series")) {
    std::string s;
    string_field(doc, "series", "", s);
    if (auto v = parse_series(s)) {
      p.series = *v;
    } else {
      errors.push_back({"series", "unknown series " + s});
    }
  }
  string_field(doc, "preset", "", p.preset);
  if (doc.contains("overrides")) p.overrides = doc.at("overrides");
  if (doc.contains("replications")) {
    const Json& r = doc.at("replications");
    if (!r.is_number_integer() || r.get<std::int64_t>() < 1 ||
        r.get<std::int64_t>() > 1'000'000) {
      errors.push_back({"replications", "must be an integer in [1, 1000000]"});
    } else {
      p.replications = static_cast<std::uint32_t>(r.get<std::int64_t>());
    }
  }
  if (doc.contains("base_seed")) {
    const Json& s = doc.at("base_seed");
    if (s.is_number_unsigned()) {
      p.base_seed = s.get<std::uint64_t>();
    } else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) {
      p.base_seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
    } else {
      errors.push_back({"base_seed", "expected a non-negative integer"});
    }
  }
  if (doc.contains("paired")) {
    if (doc.at("paired").is_boolean()) {
      p.paired = doc.at("paired").get<bool>();
    } else {
      errors.push_back({"paired", "expected true or false"});
    }
  }
  if (doc.contains("grid")) {
    const Json& g = doc.at("grid");
    if (!g.is_array()) {
      errors.push_back({"grid", "expected a list"});
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::string path = "grid[" + std::to_string(i) + "].";
        if (!g[i].is_object()) {
          errors.push_back({path.substr(0, path.size() - 1), "expected an object"});
          continue;
        }
        PlanCell c;
        for (auto it = g[i].begin(); it != g[i].end(); ++it) {
          if (it.key() != "label" && it.key() != "preset" && it.key() != "overrides") {
            errors.push_back({path + it.key(), "unknown field"});
          }
        }
        string_field(g[i], "label", path, c.label);
        string_field(g[i], "preset", path, c.preset);
        if (g[i].contains("overrides")) c.overrides = g[i].at("overrides");
        p.grid.push_back(std::move(c));
      }
    }
  }
  if (!errors.empty()) throw InvalidInput(std::move(errors));
  auto v = validate(p);
  if (!v.empty()) throw InvalidInput(std::move(v));
  return p;
}

ScenarioConfig resolve_cell(const ExperimentPlan& plan, std::size_t cell) {
  const PlanCell& c = plan.grid.at(cell);
  const std::string& preset = c.preset.empty() ? plan.preset : c.preset;
  auto base = scenario_preset(preset);
  if (!base) throw InvalidInput("preset", "unknown preset " + preset);
  ScenarioConfig s = scenario_from_json(plan.overrides, *base);
  return scenario_from_json(c.overrides, s);
}

RunSeeds run_seeds(const ExperimentPlan& plan, std::size_t cell, std::uint32_t replication) {
  RunSeeds s;
  s.world = plan.paired ? derive_seed(plan.base_seed, {stream::world, replication})
                        : derive_seed(plan.base_seed, {stream::world, cell, replication});
  s.engine = derive_seed(plan.base_seed, {stream::engine, cell, replication});
  return s;
}

std::optional<Stat> describe(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  Stat s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

ExperimentSummary summarize(std::span<const RunRow> rows, std::size_t n_cells,
                            std::span<const std::string> labels) {
  ExperimentSummary out;
  out.cells.resize(n_cells);
  struct Columns {
    std::vector<double> cr, ts, out, expl, topsis, success, throughput;
  };
  std::vector<Columns> cols(n_cells);
  std::vector<RunPoint> points;
  for (const auto& r : rows) {
    if (r.cell >= n_cells) continue;
    CellSummary& c = out.cells[r.cell];
    ++c.runs;
    if (!r.metrics) {
      ++c.failed;
      continue;
    }
    const RunMetrics& m = *r.metrics;
    Columns& k = cols[r.cell];
    if (m.cost_reduction_pct) k.cr.push_back(*m.cost_reduction_pct);
    if (m.time_savings_pct) k.ts.push_back(*m.time_savings_pct);
    k.out.push_back(m.outsourcing_rate_pct);
    k.expl.push_back(m.exploration_rate_pct);
    if (m.mean_topsis_score) k.topsis.push_back(*m.mean_topsis_score);
    k.success.push_back(m.success_rate_pct);
    k.throughput.push_back(m.throughput_tasks_per_hour);
    if (m.cost_reduction_pct) {
      points.push_back({static_cast<double>(r.n_clients + r.n_contractors),
                        m.outsourcing_rate_pct, *m.cost_reduction_pct});
    }
  }
  for (std::size_t i = 0; i < n_cells; ++i) {
    CellSummary& c = out.cells[i];
    if (i < labels.size()) c.label = labels[i];
    c.cost_reduction_pct = describe(cols[i].cr);
    c.time_savings_pct = describe(cols[i].ts);
    c.outsourcing_rate_pct = describe(cols[i].out);
    c.exploration_rate_pct = describe(cols[i].expl);
    c.mean_topsis_score = describe(cols[i].topsis);
    c.success_rate_pct = describe(cols[i].success);
    c.throughput_tasks_per_hour = describe(cols[i].throughput);
  }
  out.correlations = correlations(points);
  return out;
}

ExperimentResult run_plan(const ExperimentPlan& plan, const RunOptions& options) {
  if (auto v = validate(plan); !v.empty()) throw InvalidInput(std::move(v));
  const std::size_t n_cells = plan.grid.size();

  std::vector<std::optional<ScenarioConfig>> cells(n_cells);
  std::vector<std::string> cell_errors(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) {
    try {
      cells[i] = resolve_cell(plan, i);
    } catch (const std::exception& e) {
      cell_errors[i] = e.what();
    }
  }

  const std::size_t total = n_cells * plan.replications;
  ExperimentResult result;
  result.rows.resize(total);
  std::vector<std::vector<LedgerEntry>> kept(total);
  std::vector<char> keep(total, 0);

  auto run_one = [&](std::size_t index) {
    const std::size_t cell = index / plan.replications;
    const auto rep = static_cast<std::uint32_t>(index % plan.replications);
    RunRow& row = result.rows[index];
    row.cell = cell;
    row.cell_label = plan.grid[cell].label;
    row.replication = rep;
    const RunSeeds seeds = run_seeds(plan, cell, rep);
    row.world_seed = seeds.world;
    row.engine_seed = seeds.engine;
    if (!cells[cell]) {
      row.error = cell_errors[cell];
      return;
    }
    ScenarioConfig s = *cells[cell];
    s.seed = seeds.world;
    row.n_clients = s.n_clients;
    row.n_contractors = s.n_contractors;
    row.duration_days = s.duration_days;
    row.epsilon = s.engine.epsilon;
    row.theta_skill = s.engine.theta_skill;
    try {
      RunResult r = run_simulation(s, seeds.engine);
      row.metrics = r.metrics;
      const bool want = options.ledgers == RunOptions::Ledgers::all ||
                        (options.ledgers == RunOptions::Ledgers::first_replication && rep == 0);
      if (want) {
        kept[index] = std::move(r.ledger);
        keep[index] = 1;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
      if (row.error.empty()) row.error = "run failed";
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(total)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < total; ++i) {
    if (keep[i]) result.ledgers.emplace_back(i, std::move(kept[i]));
  }
  std::vector<std::string> labels;
  for (const auto& c : plan.grid) labels.push_back(c.label);
  result.summary = summarize(result.rows, n_cells, labels);
  return result;
}

Json to_json(const Stat& s) { return {{"mean", s.mean}, {"sd", s.sd}, {"n", s.n}}; }

namespace {

Json optional_stat(const std::optional<Stat>& s) { return s ? to_json(*s) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_json(const CellSummary& c) {
  return {{"label", c.label},
          {"runs", c.runs},
          {"failed", c.failed},
          {"cost_reduction_pct", optional_stat(c.cost_reduction_pct)},
          {"time_savings_pct", optional_stat(c.time_savings_pct)},
          {"outsourcing_rate_pct", optional_stat(c.outsourcing_rate_pct)},
          {"exploration_rate_pct", optional_stat(c.exploration_rate_pct)},
          {"mean_topsis_score", optional_stat(c.mean_topsis_score)},
          {"success_rate_pct", optional_stat(c.success_rate_pct)},
          {"throughput_tasks_per_hour", optional_stat(c.throughput_tasks_per_hour)}};
}

Json to_json(const ExperimentSummary& s) {
  Json cells = Json::array();
  for (const auto& c : s.cells) cells.push_back(to_json(c));
  return {{"cells", cells},
          {"correlations",
           {{"r_outsourcing_costreduction",
             optional_number(s.correlations.r_outsourcing_costreduction)},
            {"r_agents_costreduction", optional_number(s.correlations.r_agents_costreduction)}}}};
}

namespace {

constexpr const char* kRunColumns[] = {
    "cell",          "cell_label",        "replication",          "world_seed",
    "engine_seed",   "n_clients",         "n_contractors",        "duration_days",
    "epsilon",       "theta_skill",       "cost_reduction_pct",   "time_savings_pct",
    "outsourcing_rate_pct", "exploration_rate_pct", "mean_topsis_score",
    "throughput_tasks_per_hour", "success_rate_pct", "n_decisions", "error"};
constexpr std::size_t kRunColumnCount = std::size(kRunColumns);

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw InvalidInput("runs", "unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

template <typename T>
T parse_int(const std::string& s, const char* column) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidInput(column, "not an integer: '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const char* column) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidInput(column, "not a number: '" + s + "'");
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, const char* column) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, column);
}

}  // namespace

std::string runs_csv(std::span<const RunRow> rows) {
  std::string out;
  for (std::size_t i = 0; i < kRunColumnCount; ++i) {
    if (i) out += ',';
    out += kRunColumns[i];
  }
  out += '\n';
  for (const auto& r : rows) {
    std::vector<std::string> f;
    f.reserve(kRunColumnCount);
    f.push_back(std::to_string(r.cell));
    f.push_back(csv_field(r.cell_label));
    f.push_back(std::to_string(r.replication));
    f.push_back(std::to_string(r.world_seed));
    f.push_back(std::to_string(r.engine_seed));
    f.push_back(std::to_string(r.n_clients));
    f.push_back(std::to_string(r.n_contractors));
    f.push_back(format_number(r.duration_days));
    f.push_back(format_number(r.epsilon));
    f.push_back(format_number(r.theta_skill));
    if (r.metrics) {
      const RunMetrics& m = *r.metrics;
      f.push_back(format_optional(m.cost_reduction_pct));
      f.push_back(format_optional(m.time_savings_pct));
      f.push_back(format_number(m.outsourcing_rate_pct));
      f.push_back(format_number(m.exploration_rate_pct));
      f.push_back(format_optional(m.mean_topsis_score));
      f.push_back(format_number(m.throughput_tasks_per_hour));
      f.push_back(format_number(m.success_rate_pct));
      f.push_back(std::to_string(m.n_decisions));
    } else {
      for (int k = 0; k < 8; ++k) f.emplace_back();
    }
    f.push_back(csv_field(r.error));
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ',';
      out += f[i];
    }
    out += '\n';
  }
  return out;
}

std::vector<RunRow> parse_runs_csv(std::string_view text) {
  const auto records = parse_csv(text);
  if (records.empty()) throw InvalidInput("runs", "missing header row");
  const auto& header = records.front();
  bool header_ok = header.size() == kRunColumnCount;
  for (std::size_t i = 0; header_ok && i < kRunColumnCount; ++i) {
    header_ok = header[i] == kRunColumns[i];
  }
  if (!header_ok) throw InvalidInput("runs", "unexpected header row");

  std::vector<RunRow> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& f = records[k];
    if (f.size() != kRunColumnCount) {
      throw InvalidInput("runs", "row " + std::to_string(k) + " has " +
                                       std::to_string(f.size()) + " fields");
    }
    RunRow r;
    r.cell = parse_int<std::size_t>(f[0], "cell");
    r.cell_label = f[1];
    r.replication = parse_int<std::uint32_t>(f[2], "replication");
    r.world_seed = parse_int<std::uint64_t>(f[3], "world_seed");
    r.engine_seed = parse_int<std::uint64_t>(f[4], "engine_seed");
    r.n_clients = parse_int<std::uint32_t>(f[5], "n_clients");
    r.n_contractors = parse_int<std::uint32_t>(f[6], "n_contractors");
    r.duration_days = parse_double(f[7], "duration_days");
    r.epsilon = parse_double(f[8], "epsilon");
    r.theta_skill = parse_double(f[9], "theta_skill");
    r.error = f[18];
    if (r.error.empty()) {
      RunMetrics m;
      m.cost_reduction_pct = parse_optional(f[10], "cost_reduction_pct");
      m.time_savings_pct = parse_optional(f[11], "time_savings_pct");
      m.outsourcing_rate_pct = parse_double(f[12], "outsourcing_rate_pct");
      m.exploration_rate_pct = parse_double(f[13], "exploration_rate_pct");
      m.mean_topsis_score = parse_optional(f[14], "mean_topsis_score");
      m.throughput_tasks_per_hour = parse_double(f[15], "throughput_tasks_per_hour");
      m.success_rate_pct = parse_double(f[16], "success_rate_pct");
      m.n_decisions = parse_int<std::uint64_t>(f[17], "n_decisions");
      r.metrics = m;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace coalesce
