"""CSV and JSON export of stationary distributions, analysis reports and sweeps.

Every number is written with 12 significant digits and every JSON document
with sorted keys, so identical inputs give byte-identical files.

Schemas (version 1)
-------------------
stationary CSV : ``a1..an, probability``
analysis CSV   : ``a1..an, probability, rte, classification``
sweep CSV      : ``param_value, entropy_rate`` then for each tracked state
                 ``<label>:s, <label>:rte, <label>:rte_normalized, <label>:classification``
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .entropy import AnalysisReport
from .solver import StationaryDistribution
from .sweep import SweepResult

SCHEMA_VERSION = 1
LN2 = math.log(2.0)


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(fmt(x)) if math.isfinite(x) else None
    return x


def dump_json(obj, path: Path | None = None) -> str:
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _state_header(n: int) -> list[str]:
    return [f"a{i + 1}" for i in range(n)]


def write_stationary_csv(path, states: np.ndarray, s: StationaryDistribution | np.ndarray) -> None:
    p = s.probabilities if isinstance(s, StationaryDistribution) else np.asarray(s)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_state_header(states.shape[1]) + ["probability"])
        for st, prob in zip(states, p):
            w.writerow([fmt(c) for c in st] + [fmt(prob)])


def write_analysis_csv(path, report: AnalysisReport, log_base: str = "e") -> None:
    scale = 1.0 / LN2 if log_base == "2" else 1.0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_state_header(report.states.shape[1]) + ["probability", "rte", "classification"])
        for st, prob, h, lab in zip(report.states, report.probabilities, report.rtes, report.extrema.labels):
            w.writerow([fmt(c) for c in st] + [fmt(prob), fmt(h * scale), lab])


def analysis_document(report: AnalysisReport, log_base: str = "e") -> dict:
    scale = 1.0 / LN2 if log_base == "2" else 1.0
    ex = report.extrema
    return {
        "schema_version": SCHEMA_VERSION,
        "software_version": __version__,
        "units": "bits" if log_base == "2" else "nats",
        "process": report.metadata.get("spec"),
        "num_states": int(len(report.states)),
        "entropy_rate": report.entropy_rate * scale,
        "solver": {"method": report.solver_method, "residual": report.residual, "iterations": report.iterations},
        "global_max": report.state_tuples(ex.global_max),
        "global_max_unique": ex.global_max_unique,
        "global_min": report.state_tuples(ex.global_min),
        "global_min_unique": ex.global_min_unique,
        "local_max": report.state_tuples(ex.local_max),
        "local_min": report.state_tuples(ex.local_min),
    }


def write_analysis(prefix, report: AnalysisReport, log_base: str = "e") -> tuple[Path, Path]:
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    write_analysis_csv(csv_path, report, log_base)
    dump_json(analysis_document(report, log_base), json_path)
    return csv_path, json_path


def sweep_header(result: SweepResult) -> list[str]:
    header = ["param_value", "entropy_rate"]
    for label in result.labels:
        header += [f"{label}:s", f"{label}:rte", f"{label}:rte_normalized", f"{label}:classification"]
    return header


def write_sweep(prefix, result: SweepResult, log_base: str = "e") -> tuple[Path, Path]:
    scale = 1.0 / LN2 if log_base == "2" else 1.0
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
    labels = result.labels
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(sweep_header(result))
        for r in result.records:
            row = [fmt(r.param_value), fmt(r.entropy_rate * scale)]
            for label in labels:
                if r.ok:
                    t = next(t for t in r.tracked if t.label == label)
                    row += [fmt(t.probability), fmt(t.rte * scale), fmt(t.rte_normalized * scale), t.classification]
                else:
                    row += ["nan", "nan", "nan", "error"]
            w.writerow(row)
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "software_version": __version__,
        "units": "bits" if log_base == "2" else "nats",
        "param": result.param,
        "grid": result.grid,
        "spec": result.spec,
        "tracked": [t if isinstance(t, str) else list(t) for t in result.tracked],
        "divisor": result.divisor_kind,
        "points": [
            {
                "param_value": r.param_value,
                "N": r.N,
                "divisor": r.divisor,
                "method": r.method,
                "residual": r.residual,
                "iterations": r.iterations,
                "error": r.error,
                "states": {t.label: list(t.state) for t in r.tracked},
            }
            for r in result.records
        ],
    }
    dump_json(sidecar, json_path)
    return csv_path, json_path


def read_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows[0], rows[1:]


def read_state_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """States and probabilities from a stationary or analysis CSV."""
    header, rows = read_table(path)
    n = sum(1 for h in header if h.startswith("a") and h[1:].isdigit())
    if n < 2 or "probability" not in header:
        raise ValueError(f"{path} is not a stationary-distribution CSV")
    col = header.index("probability")
    states = np.array([[int(x) for x in row[:n]] for row in rows], dtype=np.int64)
    probs = np.array([float(row[col]) for row in rows])
    return states, probs


def read_sweep_csv(path) -> tuple[np.ndarray, np.ndarray, dict[str, dict[str, np.ndarray]]]:
    """Parameter values, entropy rates and ``{label: {quantity: values}}``."""
    header, rows = read_table(path)
    if header[:2] != ["param_value", "entropy_rate"]:
        raise ValueError(f"{path} is not a sweep CSV")
    x = np.array([float(r[0]) for r in rows])
    h = np.array([float(r[1]) for r in rows])
    series: dict[str, dict[str, np.ndarray]] = {}
    for j, name in enumerate(header[2:], start=2):
        label, _, what = name.rpartition(":")
        if what == "classification":
            continue
        series.setdefault(label, {})[what] = np.array([float(r[j]) for r in rows])
    return x, h, series
