"""Python access to the advisor planning and simulation library."""

import json

from ._advisor import (
    AdvisorError,
    check_accuracy,
    mixing_steps,
    suggestion_distribution,
    type_transition_matrix,
    wire_roundtrip,
)
from . import _advisor

__all__ = [
    "AdvisorError",
    "check_accuracy",
    "domain_model",
    "mixing_steps",
    "normalize_config",
    "run_experiment",
    "solve",
    "suggestion_distribution",
    "summarize",
    "type_transition_matrix",
    "validate_model",
    "wire_roundtrip",
]


def domain_model(domain):
    """Model JSON (as a dict) for a domain section such as {"domain": "tag"}."""
    return json.loads(_advisor.domain_model_json(json.dumps(domain)))


def validate_model(model):
    return _advisor.validate_model_json(json.dumps(model))


def solve(model, precision=0.01, time=300.0, seed=0):
    return json.loads(_advisor.solve_json(json.dumps(model), precision, time, seed))


def normalize_config(config):
    return json.loads(_advisor.normalize_config(json.dumps(config)))


def run_experiment(config):
    """Runs an experiment config dict and returns its trial records."""
    text = _advisor.run_experiment_json(json.dumps(config))
    return [json.loads(line) for line in text.splitlines() if line]


def summarize(records):
    """CSV summary rows (as dicts) for a list of trial records."""
    text = _advisor.summarize_jsonl("".join(json.dumps(r) + "\n" for r in records))
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        row = dict(zip(header, line.split(",")))
        for key in ("mean", "ci95_half_width"):
            row[key] = float(row[key])
        row["n"] = int(row["n"])
        rows.append(row)
    return rows
