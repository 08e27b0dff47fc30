"""Fixation probabilities of two-type processes and the small-mutation limit.

In the zero-mutation limit a two-type chain spends almost all its time at the
monomorphic states, switching ``(0,N) -> (N,0)`` at rate proportional to
``rho_A`` and back at rate proportional to ``rho_B``. Hence
``s(N,0) / s(0,N) -> rho_A / rho_B``, which is also the limiting ratio
``H_(0,N) / H_(N,0)`` of the return-path entropies.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import expm1, log
from typing import Iterable, Sequence

import numpy as np

from .model import GameMatrix, ProcessSpec, SelectionSpec, MutationSpec, build_kernel
from .solver import solve

NEUTRAL_BAND = 1e-9


@dataclass(frozen=True)
class FixationResult:
    rho_A: float
    rho_B: float
    method: str

    @property
    def ratio(self) -> float:
        """rho_A / rho_B: the small-mutation limit of s(N,0) / s(0,N)."""
        return self.rho_A / self.rho_B


def fixation_neutral(N: int) -> FixationResult:
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    return FixationResult(1.0 / N, 1.0 / N, "closed-form-r")


def fixation_r_game(r: float, N: int) -> FixationResult:
    """Fixation of a single mutant when type A has constant fitness r and B has 1.

    ``rho_A = (1 - 1/r) / (1 - r^-N)`` and, by the same formula with ``1/r``,
    ``rho_B = (1 - r) / (1 - r^N) = r^(1-N) rho_A``.
    """
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    if r == 1:
        raise ValueError("r = 1 is the neutral case; use fixation_neutral")
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    if abs(r - 1) < NEUTRAL_BAND:
        return fixation_neutral(N)
    return FixationResult(_single_mutant(r, N), _single_mutant(1.0 / r, N), "closed-form-r")


def _single_mutant(r: float, N: int) -> float:
    # (1 - r^-1) / (1 - r^-N), written with expm1 so r near 1 keeps precision
    x = log(r)
    return expm1(-x) / expm1(-N * x)


def stated_limit_ratio(r: float, N: int) -> float:
    """``(1 - r^(1-N)) / (1 - r^-1)``, the commonly quoted small-mutation limit.

    Kept for comparison only: it equals ``(1 - rho_B) / rho_A`` rather than a
    ratio of fixation probabilities, and disagrees with the exact limit
    ``rho_A / rho_B = r^(N-1)``.
    """
    x = log(r)
    return expm1((1 - N) * x) / expm1(-x)


def _absorption_from_one(up: np.ndarray, down: np.ndarray) -> float:
    """Probability a birth-death walk on 0..N started at 1 hits N before 0.

    Standard first-step solution: ``1 / sum_k prod_{j<=k} down_j / up_j``.
    """
    logs = np.concatenate([[0.0], np.cumsum(np.log(down) - np.log(up))])
    top = logs.max()
    return float(np.exp(-top) / np.exp(logs - top).sum())


def fixation_absorbing(spec: ProcessSpec) -> FixationResult:
    """Fixation probabilities from the zero-mutation two-type kernel itself."""
    if spec.n != 2:
        raise ValueError(f"absorbing-chain fixation needs two types, got n={spec.n}")
    if np.any(spec.mutation_matrix[~np.eye(2, dtype=bool)] > 0):
        raise ValueError("absorbing-chain fixation needs a mutation-free spec (mu = 0)")
    N = spec.N
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    T = build_kernel(spec).matrix.tocsr()
    # state index k holds (N-k, N-(N-k)) = (N-k, k) A and B individuals
    idx = np.arange(1, N)
    a_gain = np.asarray(T[idx, idx - 1]).ravel()  # one more A
    a_loss = np.asarray(T[idx, idx + 1]).ravel()  # one fewer A
    if np.any(a_gain <= 0) or np.any(a_loss <= 0):
        raise ValueError("interior transition probabilities must be positive")
    # walk in number of A individuals, i = N - k, from i = 1 upward
    up_A = a_gain[::-1]
    down_A = a_loss[::-1]
    rho_A = _absorption_from_one(up_A, down_A)
    rho_B = _absorption_from_one(a_loss, a_gain)
    return FixationResult(rho_A, rho_B, "absorbing-chain")


@dataclass
class LimitSequence:
    mus: list[float]
    ratios: list[float]
    limit: float
    target: float | None

    @property
    def extrapolated(self) -> float:
        """The ratio at the smallest grid mutation rate."""
        return self.ratios[int(np.argmin(self.mus))]


def small_mutation_limit_ratio(spec: ProcessSpec, mus: Iterable[float], method: str = "auto") -> LimitSequence:
    """Solve the chain at each mutation rate and track ``s(N,0) / s(0,N)``.

    The ratio equals ``H_(0,N) / H_(N,0)``. ``target`` is ``rho_A / rho_B`` from the
    absorbing chain, which the sequence approaches as mu shrinks.
    """
    mus = [float(m) for m in mus]
    if spec.n != 2:
        raise ValueError("small-mutation limit is defined for two-type processes")
    if any(m <= 0 for m in mus):
        raise ValueError("mutation rates must be positive; mu = 0 has no unique stationary distribution")
    ratios = []
    for mu in mus:
        s = solve(build_kernel(spec.replace(mu=mu)), method)
        ratios.append(float(s[0] / s[-1]))
    try:
        target = fixation_absorbing(spec.replace(mu=0.0)).ratio
    except ValueError:
        target = None
    limit = ratios[int(np.argmin(mus))]
    return LimitSequence(mus, ratios, limit, target)


def r_game_spec(r: float, N: int, mu: float = 0.0) -> ProcessSpec:
    """The classical constant-fitness Moran process (linear selection)."""
    return ProcessSpec(N, GameMatrix.r_game(r), MutationSpec(mu=mu), SelectionSpec("linear"))


def monotone_toward(values: Sequence[float], target: float) -> bool:
    gaps = [abs(v - target) for v in values]
    return all(b < a for a, b in zip(gaps, gaps[1:]))
