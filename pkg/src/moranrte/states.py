"""Population states of an n-type population of fixed size N.

A state is a composition ``a = (a_1, ..., a_n)`` of N into n non-negative
parts. States are kept in lexicographically *descending* order, so for
``N=2, n=2`` the order is ``(2,0), (1,1), (0,2)``. The index of a state is
computed combinatorially (rank/unrank) and never by lookup tables, which keeps
kernels for the same ``(N, n)`` bit-comparable across runs.
"""

from __future__ import annotations

from math import comb
from typing import NamedTuple, Sequence

import numpy as np


class PopulationState(NamedTuple):
    counts: tuple[int, ...]
    N: int

    @classmethod
    def of(cls, counts: Sequence[int]) -> "PopulationState":
        counts = tuple(int(c) for c in counts)
        if len(counts) < 2:
            raise ValueError("a population state needs at least two types")
        if any(c < 0 for c in counts):
            raise ValueError(f"negative count in state {counts}")
        return cls(counts, sum(counts))

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def distribution(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.N


def _check_dims(N: int, n: int) -> None:
    if n < 2:
        raise ValueError(f"need n >= 2 types, got n={n}")
    if N < 1:
        raise ValueError(f"need population size N >= 1, got N={N}")


def num_states(N: int, n: int) -> int:
    """Number of compositions of N into n non-negative parts, C(N+n-1, n-1)."""
    _check_dims(N, n)
    return comb(N + n - 1, n - 1)


def state_array(N: int, n: int) -> np.ndarray:
    """All states as an ``(num_states, n)`` integer array in canonical order."""
    _check_dims(N, n)
    if n == 2:
        first = np.arange(N, -1, -1, dtype=np.int64)
        return np.column_stack([first, N - first])
    blocks = []
    for first in range(N, -1, -1):
        rest = state_array(N - first, n - 1) if N - first > 0 else np.zeros((1, n - 1), dtype=np.int64)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def enumerate_states(N: int, n: int) -> list[PopulationState]:
    """Every composition of N into n parts, in lexicographic descending order."""
    return [PopulationState(tuple(int(x) for x in row), N) for row in state_array(N, n)]


def rank(counts: Sequence[int]) -> int:
    """Index of ``counts`` in the canonical order of its state space."""
    counts = [int(c) for c in counts]
    remaining = sum(counts)
    n = len(counts)
    r = 0
    for i, c in enumerate(counts[:-1]):
        k = n - i - 1
        # compositions whose i-th part exceeds c come first
        r += comb(remaining - c - 1 + k, k) if remaining > c else 0
        remaining -= c
    return r


def unrank(index: int, N: int, n: int) -> tuple[int, ...]:
    """Inverse of :func:`rank`."""
    total = num_states(N, n)
    if not 0 <= index < total:
        raise IndexError(f"state index {index} out of range for N={N}, n={n}")
    counts = []
    remaining = N
    for i in range(n - 1):
        k = n - i - 1
        # largest c such that the number of states preceding it is <= index
        c = remaining
        while True:
            before = comb(remaining - c - 1 + k, k) if remaining > c else 0
            size = comb(remaining - c + k - 1, k - 1)
            if before <= index < before + size:
                index -= before
                break
            c -= 1
        counts.append(c)
        remaining -= c
    counts.append(remaining)
    return tuple(counts)


def _comb_array(top: np.ndarray, k: int) -> np.ndarray:
    """Elementwise C(top, k) for integer arrays, zero where top < k."""
    top = top.astype(np.int64)
    out = np.ones_like(top)
    for j in range(k):
        out = out * (top - j) // (j + 1)
    return np.where(top >= k, out, 0)


def rank_array(states: np.ndarray) -> np.ndarray:
    """Vectorised :func:`rank` over the rows of an integer array."""
    states = np.asarray(states, dtype=np.int64)
    n = states.shape[1]
    remaining = states.sum(axis=1)
    r = np.zeros(len(states), dtype=np.int64)
    for i in range(n - 1):
        k = n - i - 1
        c = states[:, i]
        r += _comb_array(remaining - c - 1 + k, k)
        remaining = remaining - c
    return r


def moves(n: int) -> list[tuple[int, int]]:
    """The ordered pairs (alpha, beta), alpha != beta, indexing the moves i_{alpha beta}."""
    return [(a, b) for a in range(n) for b in range(n) if a != b]


def neighbor_indices(states: np.ndarray) -> np.ndarray:
    """Index of ``a + i_{alpha beta}`` for every state and move, or -1 if invalid.

    Columns follow :func:`moves`. A move is valid when ``a_beta >= 1``.
    """
    states = np.asarray(states, dtype=np.int64)
    n = states.shape[1]
    out = np.full((len(states), n * (n - 1)), -1, dtype=np.int64)
    for col, (alpha, beta) in enumerate(moves(n)):
        valid = states[:, beta] >= 1
        target = states[valid].copy()
        target[:, alpha] += 1
        target[:, beta] -= 1
        out[valid, col] = rank_array(target)
    return out


def neighbors(state: PopulationState | Sequence[int]) -> list[PopulationState]:
    """All states reachable by moving one individual from one type to another."""
    counts = state.counts if isinstance(state, PopulationState) else tuple(state)
    N = sum(counts)
    out = []
    for alpha, beta in moves(len(counts)):
        if counts[beta] >= 1:
            nxt = list(counts)
            nxt[alpha] += 1
            nxt[beta] -= 1
            out.append(PopulationState(tuple(nxt), N))
    return out
