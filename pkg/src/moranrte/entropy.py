"""Entropy rate, random trajectory entropies and stationary extrema.

All entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log
from typing import Callable, Sequence

import numpy as np

from .model import TransitionKernel
from .solver import RESIDUAL_TOL, StationaryDistribution, stationarity_residual
from .states import neighbor_indices

LOCAL_MAX = "local-max"
LOCAL_MIN = "local-min"
GLOBAL_MAX = "global-max"
GLOBAL_MIN = "global-min"
PLATEAU_TIE = "plateau-tie"
NONE = "none"

TIE_RTOL = 1e-9


def _probabilities(s) -> np.ndarray:
    if isinstance(s, StationaryDistribution):
        return s.probabilities
    return np.asarray(s, dtype=float)


def entropy_rate_bound(n: int) -> float:
    """Upper bound ((2n-1)/n) log n on the entropy rate of an n-type Moran process."""
    return (2 * n - 1) / n * log(n)


def entropy_rate(kernel: TransitionKernel, s, residual_tol: float = RESIDUAL_TOL) -> float:
    """``-sum_ij s_i T_ij log T_ij`` with ``0 log 0 = 0``."""
    p = _probabilities(s)
    if p.shape != (kernel.size,):
        raise ValueError(f"distribution has {p.size} entries, kernel has {kernel.size} states")
    residual = stationarity_residual(kernel, p)
    if residual > residual_tol:
        raise ValueError(f"distribution is not stationary for this kernel (residual {residual:.3e})")
    T = kernel.matrix
    data = T.data
    plogp = np.zeros_like(data)
    nz = data > 0
    plogp[nz] = data[nz] * np.log(data[nz])
    row_entropy = -np.add.reduceat(plogp, T.indptr[:-1]) if data.size else np.zeros(kernel.size)
    # reduceat misreads empty rows; rows of a stochastic matrix are never empty
    return float(max(np.dot(p, row_entropy), 0.0))


def rte(entropy_rate: float, s_v: float) -> float:
    """Entropy of the first-return path distribution at a state: ``H(X) / s(v)``."""
    if not s_v > 0:
        raise ValueError(f"stationary probability must be positive, got {s_v}")
    return entropy_rate / s_v


def rte_ratio(s_i: float, s_j: float) -> float:
    """``H_j / H_i``, which equals ``s_i / s_j`` whenever the entropy rate is non-zero."""
    if not (s_i > 0 and s_j > 0):
        raise ValueError(f"probabilities must be positive, got {s_i}, {s_j}")
    return s_i / s_j


@dataclass
class Extrema:
    labels: list[str]
    local_max: list[int]
    local_min: list[int]
    global_max: list[int]
    global_min: list[int]
    global_max_unique: bool
    global_min_unique: bool


def classify_values(values: np.ndarray, neighbor_idx: np.ndarray, tie_rtol: float = TIE_RTOL) -> Extrema:
    """Strict local and global extrema of ``values`` over a neighbour structure.

    ``neighbor_idx[i]`` lists the neighbours of state i, padded with -1. A state
    tied (within ``tie_rtol``) with any neighbour is a plateau-tie and never an
    extremum. Global extrema must be strict against every other state; all
    argmax/argmin states are still reported, with uniqueness flagged.
    """
    v = np.asarray(values, dtype=float)
    valid = neighbor_idx >= 0
    nb = np.where(valid, v[np.where(valid, neighbor_idx, 0)], np.nan)
    mine = v[:, None]
    tied = valid & (np.abs(nb - mine) <= tie_rtol * np.maximum(np.abs(nb), np.abs(mine)))
    has_tie = tied.any(axis=1)
    has_nb = valid.any(axis=1)
    lower = np.where(valid, nb < mine, True).all(axis=1)
    higher = np.where(valid, nb > mine, True).all(axis=1)
    is_lmax = has_nb & ~has_tie & lower
    is_lmin = has_nb & ~has_tie & higher

    top, bottom = v.max(), v.min()
    argmax = np.flatnonzero(np.abs(v - top) <= tie_rtol * max(abs(top), 1e-300))
    argmin = np.flatnonzero(np.abs(v - bottom) <= tie_rtol * max(abs(bottom), 1e-300))

    labels = np.full(len(v), NONE, dtype=object)
    labels[has_tie] = PLATEAU_TIE
    labels[is_lmax] = LOCAL_MAX
    labels[is_lmin] = LOCAL_MIN
    if len(argmax) == 1 and len(v) > 1 and is_lmax[argmax[0]]:
        labels[argmax[0]] = GLOBAL_MAX
    if len(argmin) == 1 and len(v) > 1 and is_lmin[argmin[0]]:
        labels[argmin[0]] = GLOBAL_MIN
    return Extrema(
        labels=labels.tolist(),
        local_max=np.flatnonzero(is_lmax).tolist(),
        local_min=np.flatnonzero(is_lmin).tolist(),
        global_max=argmax.tolist(),
        global_min=argmin.tolist(),
        global_max_unique=len(argmax) == 1,
        global_min_unique=len(argmin) == 1,
    )


def _neighbor_matrix(states, neighbors: Callable | None) -> np.ndarray:
    if neighbors is None:
        return neighbor_indices(np.asarray(states))
    lists = [list(neighbors(i)) for i in range(len(states))]
    width = max((len(x) for x in lists), default=0)
    out = np.full((len(states), max(width, 1)), -1, dtype=np.int64)
    for i, nbrs in enumerate(lists):
        out[i, : len(nbrs)] = nbrs
    return out


def classify_extrema(
    states, s, neighbors: Callable[[int], Sequence[int]] | None = None, tie_rtol: float = TIE_RTOL
) -> Extrema:
    """Classify every state as a stationary extremum, tie, or neither.

    ``neighbors(i)`` returns the indices adjacent to state ``i``; by default the
    Moran adjacency ``a + i_{alpha beta}`` over the canonical state order is used.
    """
    p = _probabilities(s)
    if np.any(p <= 0):
        raise ValueError("extrema classification needs a strictly positive distribution")
    return classify_values(p, _neighbor_matrix(states, neighbors), tie_rtol)


@dataclass
class StateRecord:
    state: tuple[int, ...]
    probability: float
    rte: float
    classification: str


@dataclass
class AnalysisReport:
    entropy_rate: float
    states: np.ndarray
    probabilities: np.ndarray
    rtes: np.ndarray
    extrema: Extrema
    solver_method: str
    residual: float
    iterations: int
    metadata: dict = field(default_factory=dict)

    @property
    def records(self) -> list[StateRecord]:
        return [
            StateRecord(tuple(int(c) for c in st), float(p), float(h), lab)
            for st, p, h, lab in zip(self.states, self.probabilities, self.rtes, self.extrema.labels)
        ]

    def index(self, counts: Sequence[int]) -> int:
        hits = np.flatnonzero((self.states == np.asarray(counts)).all(axis=1))
        if len(hits) == 0:
            raise KeyError(f"state {tuple(counts)} not in report")
        return int(hits[0])

    def classification(self, counts: Sequence[int]) -> str:
        return self.extrema.labels[self.index(counts)]

    def state_tuples(self, indices: Sequence[int]) -> list[tuple[int, ...]]:
        return [tuple(int(c) for c in self.states[i]) for i in indices]


def analyze(
    kernel: TransitionKernel,
    s: StationaryDistribution,
    neighbors: Callable[[int], Sequence[int]] | None = None,
    tie_rtol: float = TIE_RTOL,
) -> AnalysisReport:
    """Entropy rate, per-state RTE and extremum classification for a solved kernel."""
    h = entropy_rate(kernel, s)
    p = s.probabilities
    if neighbors is None and kernel.spec is None:
        # toy chains: adjacency is the kernel's own off-diagonal structure
        T = kernel.matrix

        def neighbors(i):
            cols = T.indices[T.indptr[i] : T.indptr[i + 1]]
            return [int(c) for c in cols if c != i]

    extrema = classify_extrema(kernel.states, p, neighbors, tie_rtol)
    return AnalysisReport(
        entropy_rate=h,
        states=kernel.states,
        probabilities=p,
        rtes=h / p,
        extrema=extrema,
        solver_method=s.method,
        residual=s.residual,
        iterations=s.iterations,
        metadata={"spec": kernel.spec.to_dict()} if kernel.spec is not None else {},
    )
