"""Process configuration documents (YAML).

A Moran process::

    N: 30
    game: hawk-dove          # hawk-dove | threetype | rps | r-game:<r> | neutral:<n> | [[...], ...]
    mu: 1/30                 # number or fraction string; or
    # mutation_matrix: [[0.9, 0.1], [0.1, 0.9]]
    selection: fermi         # linear | fermi
    beta: 1.0                # used by fermi selection only

A toy chain, given directly by its transition matrix::

    transition_matrix: [[0, 1], [1, 0]]
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from .model import GameMatrix, MutationSpec, ProcessSpec, SelectionSpec, TransitionKernel

KNOWN_KEYS = {"N", "game", "mu", "mutation_matrix", "selection", "beta", "transition_matrix", "name"}


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"config field {field!r}: {message}")
        self.field = field


@dataclass
class Config:
    spec: ProcessSpec | None = None
    chain: TransitionKernel | None = None
    name: str | None = None


def _number(field: str, value) -> float:
    try:
        if isinstance(value, str):
            return float(Fraction(value.strip()))
        if isinstance(value, bool):
            raise TypeError
        return float(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(field, f"expected a number, got {value!r}") from None


def _matrix(field: str, value) -> np.ndarray:
    try:
        m = np.array([[_number(field, x) for x in row] for row in value], dtype=float)
    except TypeError:
        raise ConfigError(field, "expected a list of rows") from None
    if m.ndim != 2:
        raise ConfigError(field, "rows must have equal length")
    return m


def parse_config(doc: dict) -> Config:
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "expected a mapping of fields")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    name = doc.get("name")

    if "transition_matrix" in doc:
        try:
            chain = TransitionKernel.from_matrix(_matrix("transition_matrix", doc["transition_matrix"]))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("transition_matrix", str(exc)) from None
        return Config(chain=chain, name=name)

    if "N" not in doc:
        raise ConfigError("N", "missing")
    N = doc["N"]
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise ConfigError("N", f"expected a positive integer, got {N!r}")

    if "game" not in doc:
        raise ConfigError("game", "missing")
    try:
        if isinstance(doc["game"], str):
            game = GameMatrix.preset(doc["game"])
        else:
            game = GameMatrix(_matrix("game", doc["game"]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("game", str(exc)) from None

    if ("mu" in doc) == ("mutation_matrix" in doc):
        raise ConfigError("mu", "give exactly one of mu or mutation_matrix")
    try:
        if "mu" in doc:
            mutation = MutationSpec(mu=_number("mu", doc["mu"]))
        else:
            mutation = MutationSpec(matrix=_matrix("mutation_matrix", doc["mutation_matrix"]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("mu" if "mu" in doc else "mutation_matrix", str(exc)) from None

    kind = doc.get("selection", "fermi")
    if kind not in ("linear", "fermi"):
        raise ConfigError("selection", f"expected 'linear' or 'fermi', got {kind!r}")
    beta = _number("beta", doc.get("beta", 1.0))
    if beta < 0:
        raise ConfigError("beta", f"must be non-negative, got {beta}")

    try:
        spec = ProcessSpec(N, game, mutation, SelectionSpec(kind, beta))
    except ValueError as exc:
        raise ConfigError("mutation_matrix" if "mutation_matrix" in doc else "game", str(exc)) from None
    return Config(spec=spec, name=name)


def load_config(path) -> Config:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("<document>", f"not valid YAML: {exc}") from None
    return parse_config(doc)
