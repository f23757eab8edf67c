#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "coalesce/experiment.hpp"
#include "coalesce/presets.hpp"
#include "coalesce/version.hpp"

namespace py = pybind11;
using namespace coalesce;

namespace {

// Documents cross the boundary as JSON text; the Python side parses them.

ScenarioConfig scenario_of(const std::string& preset, const std::string& doc) {
  auto base = scenario_preset(preset);
  if (!base) throw InvalidInput("preset", "unknown scenario preset " + preset);
  return scenario_from_json(parse_json(doc, "scenario"), *base);
}

std::string resolve(const std::string& preset, const std::string& doc) {
  return to_json(scenario_of(preset, doc)).dump();
}

std::string run(const std::string& preset, const std::string& doc, bool with_decisions) {
  const ScenarioConfig s = scenario_of(preset, doc);
  const std::uint64_t engine_seed = default_engine_seed(s.seed);
  RunResult r;
  {
    py::gil_scoped_release release;
    r = run_simulation(s, engine_seed);
  }
  Json out = {{"seed", s.seed},
              {"engine_seed", engine_seed},
              {"config", to_json(s)},
              {"metrics", to_json(r.metrics)}};
  if (with_decisions) {
    Json d = Json::array();
    for (const auto& e : r.ledger) d.push_back(to_json(e));
    out["decisions"] = std::move(d);
  }
  return out.dump();
}

std::string plan_doc(const std::string& name) {
  auto p = plan_preset(name);
  if (!p) throw InvalidInput("preset", "unknown plan preset " + name);
  return to_json(*p).dump();
}

py::tuple experiment(const std::string& plan_json, unsigned jobs) {
  const ExperimentPlan plan = plan_from_json(parse_json(plan_json, "plan"));
  if (auto v = validate(plan); !v.empty()) throw InvalidInput(std::move(v));
  ExperimentResult r;
  {
    py::gil_scoped_release release;
    r = run_plan(plan, {jobs, RunOptions::Ledgers::none});
  }
  return py::make_tuple(runs_csv(r.rows), to_json(r.summary).dump());
}

std::vector<std::string> check(const std::string& preset, const std::string& doc) {
  std::vector<std::string> problems;
  try {
    scenario_of(preset, doc);
  } catch (const InvalidInput& e) {
    for (const auto& v : e.violations) problems.push_back(v.field + ": " + v.message);
  }
  return problems;
}

std::vector<double> topsis_scores(const std::vector<CriteriaRow>& rows,
                                  const CriteriaRow& weights) {
  CriteriaMatrix m;
  for (std::size_t i = 0; i < rows.size(); ++i) m.add(i, rows[i]);
  return topsis(m, WeightVector{weights[0], weights[1], weights[2], weights[3]});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulation core: scenarios, runs, experiment plans and the decision maths.";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidInput& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.attr("__version__") = kVersion;
  m.def("scenario_presets", &scenario_preset_names);
  m.def("plan_presets", &plan_preset_names);
  m.def("resolve_scenario", &resolve, py::arg("preset"), py::arg("doc"));
  m.def("check_scenario", &check, py::arg("preset"), py::arg("doc"));
  m.def("run", &run, py::arg("preset"), py::arg("doc"), py::arg("with_decisions"));
  m.def("plan_preset", &plan_doc, py::arg("name"));
  m.def("experiment", &experiment, py::arg("plan"), py::arg("jobs"));
  m.def("topsis", &topsis_scores, py::arg("rows"), py::arg("weights"),
        "Closeness scores for criteria rows (cost, reliability, latency, security risk).");
  m.def(
      "pearson_r",
      [](const std::vector<double>& x, const std::vector<double>& y) { return pearson_r(x, y); },
      py::arg("x"), py::arg("y"));
  m.def(
      "total_variation",
      [](const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
        return total_variation(a, b);
      },
      py::arg("a"), py::arg("b"));
}
