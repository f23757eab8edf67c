// coalesce: run one scenario, an experiment plan, or validate an input file.
//
//   coalesce run [scenario.json] [--preset default] [--seed N] [--set k=v]... [--out DIR]
//   coalesce experiment [plan.json] [--preset epsilon_sweep] [--seed N] [--jobs N] [--out DIR]
//   coalesce validate <file.json> | --preset NAME
//
// Exit codes: 0 ok, 1 runtime failure, 2 invalid input.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "coalesce/experiment.hpp"
#include "coalesce/io.hpp"
#include "coalesce/presets.hpp"
#include "coalesce/version.hpp"

namespace fs = std::filesystem;
using namespace coalesce;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kInvalid = 2;

struct Common {
  std::string input;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::string out = "out";
};

void report(const InvalidInput& e) {
  for (const auto& v : e.violations) std::cerr << "invalid: " << v.field << ": " << v.message << "\n";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f.flush()) throw std::runtime_error("write failed for " + path.string());
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", *v);
  return buf;
}

std::string pct(double v) { return pct(std::optional<double>(v)); }

std::string stat_text(const std::optional<Stat>& s) {
  if (!s) return "n/a";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.1f +/- %.1f", s->mean, s->sd);
  return buf;
}

Json overrides_doc(const std::vector<std::string>& sets) {
  Json doc = Json::object();
  for (const auto& s : sets) apply_override(doc, s);
  return doc;
}

// A plan document is recognized by its plan-only keys.
bool looks_like_plan(const Json& doc) {
  return doc.is_object() && (doc.contains("grid") || doc.contains("series") ||
                             doc.contains("replications") || doc.contains("base_seed"));
}

ScenarioConfig base_preset(const std::string& name) {
  auto s = scenario_preset(name.empty() ? "default" : name);
  if (!s) throw InvalidInput("preset", "unknown scenario preset " + name);
  return *s;
}

ScenarioConfig resolve_scenario(const Common& o) {
  ScenarioConfig s = base_preset(o.preset);
  if (!o.input.empty()) s = scenario_from_json(parse_json(read_file(o.input), o.input), s);
  s = scenario_from_json(overrides_doc(o.sets), s);
  if (o.seed) s.seed = *o.seed;
  return s;
}

int cmd_run(const Common& o) {
  ScenarioConfig s = resolve_scenario(o);
  const std::uint64_t engine_seed = default_engine_seed(s.seed);
  RunResult r = run_simulation(s, engine_seed);

  RunRow row;
  row.cell_label = s.name;
  row.world_seed = s.seed;
  row.engine_seed = engine_seed;
  row.n_clients = s.n_clients;
  row.n_contractors = s.n_contractors;
  row.duration_days = s.duration_days;
  row.epsilon = s.engine.epsilon;
  row.theta_skill = s.engine.theta_skill;
  row.metrics = r.metrics;
  const std::vector<RunRow> rows = {row};

  std::string decisions;
  for (const auto& e : r.ledger) decisions += to_json(e).dump() + "\n";
  std::string reputation;
  for (std::size_t i = 0; i < r.reputation.size(); ++i) {
    for (const auto& rec : r.reputation[i]) {
      Json j = {{"ledger", i}};
      j.update(to_json(rec));
      reputation += j.dump() + "\n";
    }
  }
  std::vector<std::string> labels = {s.name};
  Json summary = {{"command", "run"},
                  {"version", kVersion},
                  {"seed", s.seed},
                  {"engine_seed", engine_seed},
                  {"config", to_json(s)},
                  {"metrics", to_json(r.metrics)},
                  {"summary", to_json(summarize(rows, 1, labels))}};

  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "decisions.jsonl", decisions);
  write_file(fs::path(o.out) / "reputation.jsonl", reputation);
  write_file(fs::path(o.out) / "runs.csv", runs_csv(rows));
  write_file(fs::path(o.out) / "summary.json", summary.dump(2) + "\n");

  const RunMetrics& m = r.metrics;
  std::cout << s.name << " seed " << s.seed << ": cost reduction " << pct(m.cost_reduction_pct)
            << ", time savings " << pct(m.time_savings_pct) << ", outsourcing "
            << pct(m.outsourcing_rate_pct) << ", exploration " << pct(m.exploration_rate_pct)
            << " (" << m.n_decisions << " decisions)\n";
  return kOk;
}

ExperimentPlan resolve_plan(const Common& o, std::optional<std::uint32_t> replications,
                            std::optional<bool> unpaired) {
  ExperimentPlan plan;
  if (!o.input.empty()) {
    plan = plan_from_json(parse_json(read_file(o.input), o.input));
  } else {
    auto p = plan_preset(o.preset.empty() ? "single" : o.preset);
    if (!p) throw InvalidInput("preset", "unknown plan preset " + o.preset);
    plan = *p;
  }
  if (!o.sets.empty()) {
    Json extra = overrides_doc(o.sets);
    Json merged = plan.overrides;
    merged.merge_patch(extra);
    plan.overrides = merged;
  }
  if (o.seed) plan.base_seed = *o.seed;
  if (replications) plan.replications = *replications;
  if (unpaired && *unpaired) plan.paired = false;
  if (auto v = validate(plan); !v.empty()) throw InvalidInput(std::move(v));
  return plan;
}

int cmd_experiment(const Common& o, unsigned jobs, std::optional<std::uint32_t> replications,
                   bool unpaired, const std::string& decisions_mode) {
  ExperimentPlan plan = resolve_plan(o, replications, unpaired);

  // Resolve every cell up front so bad overrides are input errors, not runtime ones.
  Json cells = Json::array();
  std::vector<Violation> bad;
  for (std::size_t i = 0; i < plan.grid.size(); ++i) {
    try {
      cells.push_back({{"label", plan.grid[i].label}, {"config", to_json(resolve_cell(plan, i))}});
    } catch (const InvalidInput& e) {
      for (const auto& v : e.violations) bad.push_back({plan.grid[i].label + ": " + v.field, v.message});
    }
  }
  if (!bad.empty()) throw InvalidInput(std::move(bad));

  RunOptions opts;
  opts.jobs = jobs;
  opts.ledgers = decisions_mode == "all"    ? RunOptions::Ledgers::all
                 : decisions_mode == "none" ? RunOptions::Ledgers::none
                                            : RunOptions::Ledgers::first_replication;
  ExperimentResult result = run_plan(plan, opts);

  std::string decisions;
  for (const auto& [index, ledger] : result.ledgers) {
    const RunRow& row = result.rows[index];
    for (const auto& e : ledger) {
      Json j = {{"cell", row.cell_label}, {"replication", row.replication}};
      j.update(to_json(e));
      decisions += j.dump() + "\n";
    }
  }
  std::size_t failed = 0;
  for (const auto& r : result.rows) failed += r.metrics ? 0 : 1;
  Json summary = {{"command", "experiment"},
                  {"version", kVersion},
                  {"seed", plan.base_seed},
                  {"plan", to_json(plan)},
                  {"cells", cells},
                  {"runs", result.rows.size()},
                  {"failed_runs", failed},
                  {"summary", to_json(result.summary)}};

  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "decisions.jsonl", decisions);
  write_file(fs::path(o.out) / "runs.csv", runs_csv(result.rows));
  write_file(fs::path(o.out) / "summary.json", summary.dump(2) + "\n");

  std::cout << plan.name << " (" << plan.grid.size() << " cells x " << plan.replications
            << " replications, base seed " << plan.base_seed << ")\n";
  std::printf("%-16s %22s %22s %22s %22s\n", "cell", "cost reduction %", "time savings %",
              "outsourcing %", "exploration %");
  for (const auto& c : result.summary.cells) {
    std::printf("%-16s %22s %22s %22s %22s\n", c.label.c_str(),
                stat_text(c.cost_reduction_pct).c_str(), stat_text(c.time_savings_pct).c_str(),
                stat_text(c.outsourcing_rate_pct).c_str(),
                stat_text(c.exploration_rate_pct).c_str());
  }
  const auto& k = result.summary.correlations;
  std::cout << "r(outsourcing, cost reduction) = "
            << (k.r_outsourcing_costreduction ? format_number(*k.r_outsourcing_costreduction) : "n/a")
            << ", r(agents, cost reduction) = "
            << (k.r_agents_costreduction ? format_number(*k.r_agents_costreduction) : "n/a")
            << "\n";
  if (failed) {
    std::cerr << failed << " of " << result.rows.size() << " runs failed; see runs.csv\n";
    return kRuntime;
  }
  return kOk;
}

int cmd_validate(const Common& o) {
  if (o.input.empty()) {
    if (plan_preset(o.preset)) {
      resolve_plan(o, std::nullopt, std::nullopt);
      std::cout << "ok: plan preset " << o.preset << "\n";
    } else {
      resolve_scenario(o);
      std::cout << "ok: scenario preset " << (o.preset.empty() ? "default" : o.preset) << "\n";
    }
    return kOk;
  }
  Json doc = parse_json(read_file(o.input), o.input);
  if (looks_like_plan(doc)) {
    ExperimentPlan plan = plan_from_json(doc);
    std::vector<Violation> bad;
    for (std::size_t i = 0; i < plan.grid.size(); ++i) {
      try {
        resolve_cell(plan, i);
      } catch (const InvalidInput& e) {
        for (const auto& v : e.violations) {
          bad.push_back({"grid[" + std::to_string(i) + "] " + v.field, v.message});
        }
      }
    }
    if (!bad.empty()) throw InvalidInput(std::move(bad));
    std::cout << "ok: plan " << plan.name << " with " << plan.grid.size() << " cells\n";
  } else {
    ScenarioConfig s = resolve_scenario(o);
    std::cout << "ok: scenario " << s.name << "\n";
  }
  return kOk;
}

void add_common(CLI::App* cmd, Common& o, bool with_seed_and_out) {
  cmd->add_option("--preset", o.preset, "Built-in scenario or plan name");
  cmd->add_option("--set", o.sets, "Override a field, e.g. engine.epsilon=0.2 (repeatable)");
  if (with_seed_and_out) {
    cmd->add_option("--seed", o.seed, "Scenario seed (run) or base seed (experiment)");
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated compute outsourcing market with a learned outsourcing policy"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common o;
  unsigned jobs = 1;
  std::optional<std::uint32_t> replications;
  bool unpaired = false;
  std::string decisions_mode = "first";

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("scenario", o.input, "Scenario JSON laid over the preset");
  add_common(run, o, true);

  auto* exp = app.add_subcommand("experiment", "Run a replicated experiment plan");
  exp->add_option("plan", o.input, "Plan JSON (otherwise --preset names a built-in plan)");
  add_common(exp, o, true);
  exp->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
  exp->add_option("--replications", replications, "Replications per cell")
      ->check(CLI::Range(1u, 1000000u));
  exp->add_flag("--unpaired", unpaired, "Give every cell its own worlds");
  exp->add_option("--decisions", decisions_mode, "Decision records to keep: none, first, all")
      ->check(CLI::IsMember({"none", "first", "all"}))
      ->capture_default_str();

  auto* val = app.add_subcommand("validate", "Check a scenario or plan without running it");
  val->add_option("file", o.input, "Scenario or plan JSON");
  add_common(val, o, false);
  val->add_option("--seed", o.seed, "Seed to validate with");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  if (val->parsed() && o.input.empty() && o.preset.empty()) {
    std::cerr << "validate: give a file or --preset\n";
    return kInvalid;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (exp->parsed()) return cmd_experiment(o, jobs, replications, unpaired, decisions_mode);
    return cmd_validate(o);
  } catch (const InvalidInput& e) {
    report(e);
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
