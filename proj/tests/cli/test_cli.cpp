#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "coalesce/experiment.hpp"

using namespace coalesce;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "coalesce_cli_tests";

int cli(const std::string& args) {
  fs::create_directories(kScratch);
  const std::string cmd = std::string("\"") + COALESCE_CLI + "\" " + args + " > \"" +
                          (kScratch / "last_stdout.txt").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string out_dir(const std::string& name) {
  const auto d = kScratch / name;
  fs::remove_all(d);
  return "\"" + d.string() + "\"";
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("run writes all outputs and is byte-deterministic") {
  REQUIRE(cli("run --seed 3 --set duration_days=1 --out " + out_dir("r0")) == 0);
  REQUIRE(cli("run --seed 3 --set duration_days=1 --out " + out_dir("r1")) == 0);
  for (const char* f : {"decisions.jsonl", "reputation.jsonl", "runs.csv", "summary.json"}) {
    INFO(f);
    CHECK(fs::file_size(kScratch / "r0" / f) > 0);
    CHECK(slurp(kScratch / "r0" / f) == slurp(kScratch / "r1" / f));
  }
  const auto summary = Json::parse(slurp(kScratch / "r0" / "summary.json"));
  CHECK(summary["seed"] == 3);
  CHECK(summary.contains("version"));
  CHECK(summary["config"]["duration_days"] == 1.0);
  REQUIRE(cli("run --seed 4 --set duration_days=1 --out " + out_dir("r2")) == 0);
  CHECK(slurp(kScratch / "r0" / "decisions.jsonl") != slurp(kScratch / "r2" / "decisions.jsonl"));
}

TEST_CASE("config echo reruns to the same bytes") {
  REQUIRE(cli("run --seed 9 --set duration_days=1 --out " + out_dir("e0")) == 0);
  const auto summary = Json::parse(slurp(kScratch / "e0" / "summary.json"));
  write(kScratch / "echo.json", summary["config"].dump());
  REQUIRE(cli("run \"" + (kScratch / "echo.json").string() + "\" --out " + out_dir("e1")) == 0);
  CHECK(slurp(kScratch / "e0" / "runs.csv") == slurp(kScratch / "e1" / "runs.csv"));
  CHECK(slurp(kScratch / "e0" / "decisions.jsonl") == slurp(kScratch / "e1" / "decisions.jsonl"));
}

TEST_CASE("experiment output does not depend on --jobs and round-trips") {
  const std::string args =
      "experiment --preset epsilon_sweep --replications 2 --seed 5 --set duration_days=0.5 ";
  REQUIRE(cli(args + "--jobs 1 --out " + out_dir("x1")) == 0);
  REQUIRE(cli(args + "--jobs 3 --out " + out_dir("x3")) == 0);
  for (const char* f : {"decisions.jsonl", "runs.csv", "summary.json"}) {
    INFO(f);
    CHECK(slurp(kScratch / "x1" / f) == slurp(kScratch / "x3" / f));
  }
  const auto text = slurp(kScratch / "x1" / "runs.csv");
  const auto rows = parse_runs_csv(text);
  CHECK(rows.size() == 10);
  CHECK(runs_csv(rows) == text);
  const auto summary = Json::parse(slurp(kScratch / "x1" / "summary.json"));
  CHECK(summary["seed"] == 5);
  CHECK(summary["cells"].size() == 5);
}

TEST_CASE("outputs carry no clock or host content") {
  REQUIRE(cli("run --seed 1 --set duration_days=0.5 --out " + out_dir("h")) == 0);
  const auto s = slurp(kScratch / "h" / "summary.json");
  for (const char* key : {"time", "timestamp", "date", "host", "hostname", "elapsed_s",
                          "wall_time", "user"}) {
    INFO(key);
    CHECK(s.find(std::string("\"") + key + "\"") == std::string::npos);
  }
}

TEST_CASE("invalid input exits 2") {
  CHECK(cli("run --set engine.epsilon=1.5 --out " + out_dir("bad")) == 2);
  CHECK(cli("run --preset nowhere --out " + out_dir("bad")) == 2);
  CHECK(cli("run --set no_equals --out " + out_dir("bad")) == 2);
  CHECK(cli("run --bogus-flag") == 2);
  CHECK(cli("experiment --jobs 0 --out " + out_dir("bad")) == 2);
  CHECK(cli("run /nonexistent/scenario.json --out " + out_dir("bad")) == 2);
  write(kScratch / "mix.json", R"({"archetype_mix": {"gpu_specialist": 0.1}})");
  CHECK(cli("validate \"" + (kScratch / "mix.json").string() + "\"") == 2);
  CHECK(slurp(kScratch / "last_stdout.txt").find("archetype_mix") != std::string::npos);
  write(kScratch / "broken.json", "{not json");
  CHECK(cli("validate \"" + (kScratch / "broken.json").string() + "\"") == 2);
  write(kScratch / "plan.json", R"({"grid": [{"label": "a", "overrides": {"nope": 1}}]})");
  CHECK(cli("validate \"" + (kScratch / "plan.json").string() + "\"") == 2);
}

TEST_CASE("validate accepts good scenarios and plans") {
  CHECK(cli("validate --preset stationary") == 0);
  CHECK(cli("validate --preset agent_scaling") == 0);
  write(kScratch / "good.json", R"({"n_clients": 4, "engine": {"epsilon": 0.2}})");
  CHECK(cli("validate \"" + (kScratch / "good.json").string() + "\"") == 0);
}

TEST_CASE("a run that cannot complete exits 1") {
  // Unwritable output location: a regular file where the directory should be.
  write(kScratch / "blocker", "x");
  CHECK(cli("run --set duration_days=0.5 --out \"" + (kScratch / "blocker" / "sub").string() +
            "\"") == 1);
}
