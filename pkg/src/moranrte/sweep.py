"""Parameter sweeps over selection strength, mutation rate and population size."""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .entropy import analyze
from .model import ProcessSpec, build_kernel
from .solver import solve

log = logging.getLogger(__name__)

SYMBOLIC = ("corner", "boundary-midpoint", "center")
DIVISORS = ("stars-bars", "solid-simplex")


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("grid needs at least one point")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"grid spacing must be linear or log, got {self.spacing!r}")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log grids need positive endpoints")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """``start:stop:count[:linear|log]``."""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"grid must be start:stop:count[:spacing], got {text!r}")
        return cls(float(parts[0]), float(parts[1]), int(parts[2]), parts[3] if len(parts) == 4 else "linear")


def state_count_divisor(N: int, n: int, kind: str = "stars-bars") -> int:
    """Number of states C(N+n-1, n-1), or C(N+n, n) counting all compositions with sum <= N."""
    if kind == "stars-bars":
        return math.comb(N + n - 1, n - 1)
    if kind == "solid-simplex":
        return math.comb(N + n, n)
    raise ValueError(f"unknown divisor {kind!r}; expected one of {DIVISORS}")


def _orbit(base: Sequence[int]) -> list[tuple[int, ...]]:
    """Distinct permutations of ``base`` in descending lexicographic order."""
    return sorted(set(itertools.permutations(base)), reverse=True)


def resolve_tracked(label: str | Sequence[int], N: int, n: int) -> list[tuple[int, ...]]:
    """Concrete states for a symbolic label (its whole permutation orbit) or an explicit tuple."""
    if not isinstance(label, str):
        st = tuple(int(c) for c in label)
        if len(st) != n or sum(st) != N or min(st) < 0:
            raise ValueError(f"tracked state {st} is not a state for N={N}, n={n}")
        return [st]
    if label == "corner":
        return _orbit((N,) + (0,) * (n - 1))
    if label == "boundary-midpoint":
        if N % 2:
            raise ValueError(f"N={N} has no boundary midpoint (needs N divisible by 2)")
        return _orbit((N // 2, N // 2) + (0,) * (n - 2))
    if label == "center":
        if N % n:
            raise ValueError(f"N={N} has no center state (needs N divisible by {n})")
        return [(N // n,) * n]
    raise ValueError(f"unknown tracked state {label!r}; expected one of {SYMBOLIC} or an explicit tuple")


def parse_tracked(text: str) -> list[str | tuple[int, ...]]:
    """Comma-separated symbolic labels and ``a-b-c`` tuples, e.g. ``corner,center,30-30-0``."""
    out: list[str | tuple[int, ...]] = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        if item in SYMBOLIC:
            out.append(item)
        else:
            out.append(tuple(int(c) for c in item.split("-")))
    return out


def _column_labels(tracked, N: int, n: int) -> list[tuple[str, str | tuple]]:
    """(column label, symbolic class) for every concrete tracked state."""
    cols = []
    for label in tracked:
        members = resolve_tracked(label, N, n)
        if isinstance(label, str):
            cols += [(f"{label}[{i}]", label) for i in range(len(members))]
        else:
            name = "-".join(map(str, members[0]))
            cols.append((name, name))
    return cols


@dataclass
class TrackedValue:
    label: str
    group: str
    state: tuple[int, ...]
    probability: float
    rte: float
    rte_normalized: float
    classification: str


@dataclass
class SweepRecord:
    param_value: float
    N: int
    entropy_rate: float = math.nan
    tracked: list[TrackedValue] = field(default_factory=list)
    residual: float = math.nan
    method: str = ""
    iterations: int = 0
    divisor: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def value(self, label: str, what: str = "rte") -> float:
        for t in self.tracked:
            if t.label == label:
                return getattr(t, what)
        raise KeyError(label)

    def group_values(self, group: str, what: str = "rte") -> list[float]:
        return [getattr(t, what) for t in self.tracked if t.group == group]

    def argmin_group(self, what: str = "rte") -> str:
        """Tracked group whose (first) member has the smallest value of ``what``."""
        if not self.tracked:
            raise ValueError(f"no tracked values at {self.param_value:g}: {self.error}")
        best = min(self.tracked, key=lambda t: getattr(t, what))
        return best.group


@dataclass
class SweepResult:
    param: str
    grid: list[float]
    tracked: list
    records: list[SweepRecord]
    divisor_kind: str
    spec: dict

    @property
    def failures(self) -> list[SweepRecord]:
        return [r for r in self.records if not r.ok]

    def series(self, label: str, what: str = "rte") -> np.ndarray:
        return np.array([r.value(label, what) if r.ok else math.nan for r in self.records])

    @property
    def entropy_rates(self) -> np.ndarray:
        return np.array([r.entropy_rate for r in self.records])

    @property
    def labels(self) -> list[str]:
        first = next((r for r in self.records if r.ok), None)
        return [t.label for t in first.tracked] if first else []


def _evaluate(spec: ProcessSpec, tracked, param_value: float, divisor_kind: str, solver_opts: dict) -> SweepRecord:
    record = SweepRecord(param_value=float(param_value), N=spec.N)
    try:
        cols = _column_labels(tracked, spec.N, spec.n)
        states = [st for label in tracked for st in resolve_tracked(label, spec.N, spec.n)]
        kernel = build_kernel(spec)
        s = solve(kernel, **solver_opts)
        report = analyze(kernel, s)
        divisor = state_count_divisor(spec.N, spec.n, divisor_kind)
        record.divisor = divisor
        record.entropy_rate = report.entropy_rate
        record.residual = s.residual
        record.method = s.method
        record.iterations = s.iterations
        for (label, group), st in zip(cols, states):
            i = kernel.index(st)
            h = float(report.rtes[i])
            record.tracked.append(
                TrackedValue(
                    label=label,
                    group=group if isinstance(group, str) else label,
                    state=st,
                    probability=float(report.probabilities[i]),
                    rte=h,
                    rte_normalized=h / divisor,
                    classification=report.extrema.labels[i],
                )
            )
    except Exception as exc:  # recorded per point; a sweep is never all-or-nothing
        log.warning("sweep point %g failed: %s", param_value, exc)
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def _check_grid(values: Sequence[float]) -> list[float]:
    values = [float(v) for v in values]
    if len(values) > 1:
        d = np.diff(values)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep grid must be strictly monotone")
    return values


def _run(param, template, values, specs, tracked, divisor, threads, solver_opts) -> SweepResult:
    threads = threads or int(os.environ.get("MORANRTE_THREADS", 0)) or os.cpu_count() or 1
    jobs = list(zip(specs, values))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda job: _evaluate(job[0], tracked, job[1], divisor, solver_opts), jobs))
    else:
        records = [_evaluate(spec, tracked, v, divisor, solver_opts) for spec, v in jobs]
    return SweepResult(param, list(values), list(tracked), records, divisor, template.to_dict())


def sweep_beta(
    template: ProcessSpec,
    betas: Iterable[float],
    tracked: Sequence,
    *,
    divisor: str = "stars-bars",
    threads: int | None = None,
    **solver_opts,
) -> SweepResult:
    if template.selection.kind != "fermi":
        raise ValueError("a beta sweep needs fermi selection")
    values = _check_grid(betas)
    if any(b < 0 for b in values):
        raise ValueError("beta must be non-negative")
    _column_labels(tracked, template.N, template.n)
    specs = [template.replace(beta=b) for b in values]
    return _run("beta", template, values, specs, tracked, divisor, threads, solver_opts)


def sweep_mu(
    template: ProcessSpec,
    mus: Iterable[float],
    tracked: Sequence,
    *,
    divisor: str = "stars-bars",
    threads: int | None = None,
    **solver_opts,
) -> SweepResult:
    values = _check_grid(mus)
    if any(m <= 0 or m > 1 for m in values):
        raise ValueError("mutation rates must lie in (0, 1]")
    _column_labels(tracked, template.N, template.n)
    specs = [template.replace(mu=m) for m in values]
    return _run("mu", template, values, specs, tracked, divisor, threads, solver_opts)


def sweep_N(
    template: ProcessSpec,
    Ns: Iterable[int],
    tracked: Sequence,
    *,
    normalize: bool = True,
    divisor: str = "stars-bars",
    threads: int | None = None,
    **solver_opts,
) -> SweepResult:
    """Sweep population size with ``mu = 1/N`` at every point.

    Every N must admit a lattice point for every symbolic tracked state; the
    first N that does not is reported and nothing is computed. With
    ``normalize=False`` the normalised column carries the raw RTE.
    """
    values = _check_grid(Ns)
    for N in values:
        if N != int(N) or N < 2:
            raise ValueError(f"invalid population size N={N}")
        try:
            _column_labels(tracked, int(N), template.n)
        except ValueError as exc:
            raise ValueError(f"invalid N={int(N)}: {exc}") from None
    specs = [template.replace(N=int(N), mu=1.0 / N) for N in values]
    result = _run("N", template, [int(v) for v in values], specs, tracked, divisor, threads, solver_opts)
    if not normalize:
        for r in result.records:
            for t in r.tracked:
                t.rte_normalized = t.rte
            r.divisor = 1
        result.divisor_kind = "none"
    return result


def is_strictly_increasing(values: Sequence[float]) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))


def is_strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))
