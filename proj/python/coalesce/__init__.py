"""Outsourcing-marketplace simulator: single runs, replicated experiments and
the decision maths behind them."""

import csv
import io
import json

from . import _core
from ._core import __version__, pearson_r, plan_presets, scenario_presets, topsis, total_variation

__all__ = [
    "__version__",
    "check_scenario",
    "experiment",
    "pearson_r",
    "plan",
    "plan_presets",
    "run",
    "scenario",
    "scenario_presets",
    "topsis",
    "total_variation",
]


def _doc(overrides, seed=None):
    doc = dict(overrides or {})
    if seed is not None:
        doc["seed"] = int(seed)
    return json.dumps(doc)


def scenario(preset="default", overrides=None, seed=None):
    """Fully resolved scenario document. Raises ValueError on bad input."""
    return json.loads(_core.resolve_scenario(preset, _doc(overrides, seed)))


def check_scenario(preset="default", overrides=None):
    """List of "field: problem" strings; empty when the scenario is valid."""
    return _core.check_scenario(preset, _doc(overrides))


def run(preset="default", overrides=None, seed=None, decisions=False):
    """One simulation. Returns seed, engine_seed, config and metrics, plus the
    decision records when `decisions` is set."""
    return json.loads(_core.run(preset, _doc(overrides, seed), decisions))


def plan(name="single"):
    """Built-in experiment plan as a dict, ready to edit and pass to experiment()."""
    return json.loads(_core.plan_preset(name))


def _cell(text):
    if text == "":
        return None
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def experiment(plan_doc, jobs=1):
    """Runs every (cell, replication) of a plan. Returns (rows, summary, csv_text);
    rows are dicts keyed by the CSV header, empty fields as None."""
    text, summary = _core.experiment(json.dumps(plan_doc), int(jobs))
    rows = [{k: _cell(v) for k, v in r.items()} for r in csv.DictReader(io.StringIO(text))]
    for r in rows:
        if r["cell_label"] is not None:
            r["cell_label"] = str(r["cell_label"])
        if r["error"] is not None:
            r["error"] = str(r["error"])
    return rows, json.loads(summary), text
