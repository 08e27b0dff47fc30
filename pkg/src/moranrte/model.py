"""Moran process with mutation: process parameters and the transition kernel."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .states import PopulationState, moves, rank_array, state_array

ROW_SUM_ATOL = 1e-12


class DegenerateStateError(ValueError):
    """Raised when no type at a state has positive reproductive weight."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GameMatrix:
    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"game matrix must be square, got shape {g.shape}")
        if g.shape[0] < 2:
            raise ValueError("game matrix needs at least two types")
        if not np.all(np.isfinite(g)):
            raise ValueError("game matrix has non-finite entries")
        object.__setattr__(self, "entries", _frozen(g))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def fitness(self, distribution: np.ndarray) -> np.ndarray:
        """f(x) = G x, row-wise if ``distribution`` is 2-d."""
        return distribution @ self.entries.T

    @classmethod
    def hawk_dove(cls) -> "GameMatrix":
        return cls(np.array([[1.0, 2.0], [2.0, 1.0]]))

    @classmethod
    def three_type(cls) -> "GameMatrix":
        return cls(np.ones((3, 3)) - np.eye(3))

    @classmethod
    def rps(cls) -> "GameMatrix":
        return cls(np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]))

    @classmethod
    def r_game(cls, r: float) -> "GameMatrix":
        """Constant fitness r for type A and 1 for type B."""
        if r <= 0:
            raise ValueError(f"r must be positive, got {r}")
        return cls(np.array([[r, r], [1.0, 1.0]]))

    @classmethod
    def neutral(cls, n: int) -> "GameMatrix":
        return cls(np.ones((n, n)))

    @classmethod
    def preset(cls, name: str) -> "GameMatrix":
        """Look up ``hawk-dove``, ``threetype``, ``rps``, ``neutral:<n>`` or ``r-game:<r>``."""
        key = name.strip().lower()
        if key == "hawk-dove":
            return cls.hawk_dove()
        if key == "threetype":
            return cls.three_type()
        if key == "rps":
            return cls.rps()
        if key.startswith("r-game:"):
            return cls.r_game(float(key.split(":", 1)[1]))
        if key.startswith("neutral:"):
            return cls.neutral(int(key.split(":", 1)[1]))
        raise ValueError(f"unknown game preset {name!r}")


@dataclass(frozen=True)
class MutationSpec:
    """Mutation matrix ``M[k, i]``: probability an offspring of type k is born as type i.

    Either a uniform rate ``mu`` (expanded to ``mu/(n-1)`` off the diagonal) or an
    explicit row-stochastic ``matrix``.
    """

    mu: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if (self.mu is None) == (self.matrix is None):
            raise ValueError("give exactly one of mu or matrix")
        if self.mu is not None:
            if not 0.0 <= self.mu <= 1.0:
                raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
            object.__setattr__(self, "mu", float(self.mu))
        else:
            m = np.array(self.matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"mutation matrix must be square, got shape {m.shape}")
            if np.any(m < 0) or np.any(m > 1):
                raise ValueError("mutation matrix entries must lie in [0, 1]")
            if np.any(np.abs(m.sum(axis=1) - 1.0) > ROW_SUM_ATOL):
                raise ValueError("mutation matrix rows must sum to 1")
            object.__setattr__(self, "matrix", _frozen(m))

    def expand(self, n: int) -> np.ndarray:
        if self.matrix is not None:
            if self.matrix.shape[0] != n:
                raise ValueError(f"mutation matrix is {self.matrix.shape[0]}x{self.matrix.shape[0]}, expected {n}x{n}")
            return self.matrix
        m = np.full((n, n), self.mu / (n - 1))
        np.fill_diagonal(m, 1.0 - self.mu)
        return m

    def strictly_positive(self, n: int) -> bool:
        off = ~np.eye(n, dtype=bool)
        return bool(np.all(self.expand(n)[off] > 0))


@dataclass(frozen=True)
class SelectionSpec:
    kind: Literal["linear", "fermi"] = "fermi"
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "fermi"):
            raise ValueError(f"selection must be 'linear' or 'fermi', got {self.kind!r}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    def weights(self, distribution: np.ndarray, fitness: np.ndarray) -> np.ndarray:
        """Reproductive weights phi; for Fermi selection scaled by a per-state constant."""
        if self.kind == "linear":
            return distribution * fitness
        z = self.beta * fitness
        z = z - z.max(axis=-1, keepdims=True)
        return distribution * np.exp(z)


@dataclass(frozen=True)
class ProcessSpec:
    N: int
    game: GameMatrix
    mutation: MutationSpec
    selection: SelectionSpec = field(default_factory=SelectionSpec)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        self.mutation.expand(self.game.n)

    @property
    def n(self) -> int:
        return self.game.n

    @property
    def mutation_matrix(self) -> np.ndarray:
        return self.mutation.expand(self.n)

    def replace(self, **changes) -> "ProcessSpec":
        """Copy with ``N``, ``mu``, ``beta`` or any field swapped out."""
        fields = {"N": self.N, "game": self.game, "mutation": self.mutation, "selection": self.selection}
        if "mu" in changes:
            fields["mutation"] = MutationSpec(mu=changes.pop("mu"))
        if "beta" in changes:
            fields["selection"] = SelectionSpec(self.selection.kind, changes.pop("beta"))
        fields.update(changes)
        return ProcessSpec(**fields)

    def to_dict(self) -> dict:
        d = {
            "N": self.N,
            "game": self.game.entries.tolist(),
            "selection": self.selection.kind,
            "beta": self.selection.beta,
        }
        if self.mutation.mu is not None:
            d["mu"] = self.mutation.mu
        else:
            d["mutation_matrix"] = self.mutation.matrix.tolist()
        return d


def _reproduction_matrix(states: np.ndarray, spec: ProcessSpec) -> np.ndarray:
    x = states / spec.N
    phi = spec.selection.weights(x, spec.game.fitness(x))
    if spec.selection.kind == "linear" and np.any(phi < 0):
        bad = tuple(int(c) for c in states[np.argmax((phi < 0).any(axis=1))])
        raise DegenerateStateError(
            f"linear selection gives negative fitness weight at state {bad}; use fermi selection for games with negative payoffs"
        )
    total = phi.sum(axis=1)
    if np.any(total <= 0):
        bad = tuple(int(c) for c in states[np.argmax(total <= 0)])
        raise DegenerateStateError(f"all reproductive weights vanish at state {bad}")
    return (phi @ spec.mutation_matrix) / total[:, None]


def reproduction_probabilities(state: PopulationState | Sequence[int], spec: ProcessSpec) -> np.ndarray:
    """Probability that the newborn is of each type at ``state``.

    ``p_i = sum_k phi_k M_ki / sum_k phi_k``.
    """
    counts = state.counts if isinstance(state, PopulationState) else tuple(state)
    if len(counts) != spec.n or sum(counts) != spec.N:
        raise ValueError(f"state {counts} is not in the state space of N={spec.N}, n={spec.n}")
    return _reproduction_matrix(np.asarray([counts], dtype=np.int64), spec)[0]


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Row-stochastic sparse transition matrix over an ordered list of states.

    ``states`` is an ``(m, n)`` integer array; ``matrix`` an ``m x m`` CSR
    matrix holding each row's neighbour transitions plus the self-loop.
    """

    states: np.ndarray
    matrix: sp.csr_matrix
    spec: ProcessSpec | None = None
    irreducible: bool = True

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def state(self, index: int) -> PopulationState:
        row = self.states[index]
        return PopulationState(tuple(int(c) for c in row), int(row.sum()))

    def index(self, counts: Sequence[int]) -> int:
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (self.n,) or np.any(counts < 0) or (self.spec is not None and counts.sum() != self.spec.N):
            raise KeyError(f"state {tuple(counts.tolist())} is not in this state space")
        if self.spec is None:
            hits = np.flatnonzero((self.states == counts).all(axis=1))
            if len(hits) == 0:
                raise KeyError(f"state {tuple(counts.tolist())} is not in this state space")
            return int(hits[0])
        return int(rank_array(counts[None, :])[0])

    def row(self, index: int) -> list[tuple[int, float]]:
        start, stop = self.matrix.indptr[index], self.matrix.indptr[index + 1]
        return list(zip(self.matrix.indices[start:stop].tolist(), self.matrix.data[start:stop].tolist()))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @classmethod
    def from_matrix(cls, matrix, states: np.ndarray | None = None) -> "TransitionKernel":
        """Wrap an arbitrary row-stochastic matrix, e.g. a toy chain."""
        m = sp.csr_matrix(np.asarray(matrix, dtype=float) if not sp.issparse(matrix) else matrix, dtype=float)
        m.eliminate_zeros()
        m.sort_indices()
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"transition matrix must be square, got shape {m.shape}")
        if m.data.size and (m.data.min() < 0 or m.data.max() > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.any(np.abs(np.asarray(m.sum(axis=1)).ravel() - 1.0) > ROW_SUM_ATOL):
            raise ValueError("transition matrix rows must sum to 1")
        if states is None:
            states = np.arange(m.shape[0], dtype=np.int64)[:, None]
        return cls(_frozen(np.asarray(states, dtype=np.int64)), m, None, is_irreducible(m))


def is_irreducible(matrix: sp.spmatrix) -> bool:
    ncomp, _ = connected_components(matrix, directed=True, connection="strong")
    return ncomp == 1


def build_kernel(spec: ProcessSpec) -> TransitionKernel:
    """Moran-with-mutation kernel: ``T(a, a + i_{ab}) = p_a(x) x_b`` and a self-loop."""
    states = state_array(spec.N, spec.n)
    m = len(states)
    p = _reproduction_matrix(states, spec)
    x = states / spec.N

    rows, cols, vals = [], [], []
    offdiag = np.zeros(m)
    for alpha, beta in moves(spec.n):
        valid = np.flatnonzero(states[:, beta] >= 1)
        target = states[valid].copy()
        target[:, alpha] += 1
        target[:, beta] -= 1
        prob = p[valid, alpha] * x[valid, beta]
        rows.append(valid)
        cols.append(rank_array(target))
        vals.append(prob)
        offdiag[valid] += prob
    rows.append(np.arange(m))
    cols.append(np.arange(m))
    vals.append(np.clip(1.0 - offdiag, 0.0, 1.0))

    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
    )
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return TransitionKernel(_frozen(states), matrix, spec, is_irreducible(matrix))
