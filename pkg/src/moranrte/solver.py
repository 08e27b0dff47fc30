"""Stationary distributions of transition kernels.

Three routes, all returning a :class:`StationaryDistribution` whose residual
``max_a |(sT)_a - s_a|`` has been recomputed independently of the solve:

* ``birth-death`` -- exact product formula for two-type (tridiagonal) chains,
* ``dense``       -- direct solve of ``s T = s, sum(s) = 1`` (GTH elimination),
* ``power``       -- ``s <- s T`` from the uniform vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import TransitionKernel

log = logging.getLogger(__name__)

Method = Literal["auto", "birth-death", "dense", "power"]

DENSE_CAP = 4000
RESIDUAL_TOL = 1e-10
POWER_TOL = 1e-13
POWER_MAX_ITERS = 10**6


class SolverError(RuntimeError):
    pass


class ReducibleChainError(SolverError):
    pass


class NonConvergenceError(SolverError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class StationaryDistribution:
    probabilities: np.ndarray
    method: str
    residual: float
    iterations: int = 0

    def __len__(self) -> int:
        return len(self.probabilities)

    def __getitem__(self, index):
        return self.probabilities[index]


def stationarity_residual(kernel: TransitionKernel, s: np.ndarray) -> float:
    """L-infinity norm of ``s T - s``."""
    return float(np.max(np.abs(kernel.matrix.T @ s - s)))


def _finish(kernel, s, method, iterations, residual_tol) -> StationaryDistribution:
    s = np.asarray(s, dtype=float)
    s = s / s.sum()
    residual = stationarity_residual(kernel, s)
    if np.any(s < 0) or residual > residual_tol:
        raise SolverError(f"{method} solution fails verification: residual {residual:.3e} > {residual_tol:.1e}")
    s.setflags(write=False)
    return StationaryDistribution(s, method, residual, iterations)


def _require_irreducible(kernel: TransitionKernel) -> None:
    if not kernel.irreducible:
        raise ReducibleChainError("kernel is reducible (no unique stationary distribution); is mu > 0?")


def solve_birth_death(kernel: TransitionKernel, residual_tol: float = RESIDUAL_TOL) -> StationaryDistribution:
    """Exact stationary distribution of a two-type chain.

    With states ordered ``(N,0), (N-1,1), ..., (0,N)``,
    ``s(k+1)/s(k) = T(k -> k+1) / T(k+1 -> k)``. The products are accumulated
    in log space so long chains with tiny rates do not underflow.
    """
    if kernel.n != 2:
        raise ValueError(f"birth-death solver needs two types, got n={kernel.n}")
    T = kernel.matrix
    m = kernel.size
    if m < 2:
        return _finish(kernel, np.ones(1), "birth-death", 0, residual_tol)
    k = np.arange(m - 1)
    up = np.asarray(T[k, k + 1]).ravel()
    down = np.asarray(T[k + 1, k]).ravel()
    if np.any(up <= 0) or np.any(down <= 0):
        raise ReducibleChainError("birth-death solver needs every up and down transition positive")
    offband = T.copy()
    offband.setdiag(0)
    for d in (-1, 1):
        offband.setdiag(0, d)
    offband.eliminate_zeros()
    if offband.nnz:
        raise ValueError("kernel is not tridiagonal")
    logs = np.concatenate([[0.0], np.cumsum(np.log(up) - np.log(down))])
    s = np.exp(logs - logs.max())
    return _finish(kernel, s, "birth-death", 0, residual_tol)


def _bandwidth(kernel: TransitionKernel) -> int:
    coo = kernel.matrix.tocoo()
    return int(np.max(np.abs(coo.row - coo.col), initial=0))


def _gth(A: np.ndarray, band: int) -> np.ndarray:
    """Grassmann-Taksar-Heyman elimination on a dense copy of ``T``.

    Subtraction-free, so tiny stationary probabilities keep full relative
    accuracy. Fill-in never leaves the band, so each elimination step only
    touches the ``band x band`` block above and left of the pivot.
    """
    m = A.shape[0]
    for k in range(m - 1, 0, -1):
        lo = max(0, k - band)
        scale = A[k, lo:k].sum()
        if scale <= 0:
            raise ReducibleChainError(f"state {k} cannot reach any lower-indexed state; kernel is reducible")
        A[lo:k, k] /= scale
        A[lo:k, lo:k] += np.outer(A[lo:k, k], A[k, lo:k])
    x = np.zeros(m)
    x[0] = 1.0
    for k in range(1, m):
        lo = max(0, k - band)
        x[k] = x[lo:k] @ A[lo:k, k]
    return x


def solve_dense(
    kernel: TransitionKernel, dense_cap: int = DENSE_CAP, residual_tol: float = RESIDUAL_TOL
) -> StationaryDistribution:
    """Direct solve of ``s T = s, sum(s) = 1`` by GTH elimination."""
    if kernel.size > dense_cap:
        raise ValueError(f"{kernel.size} states exceeds the dense cap of {dense_cap}")
    _require_irreducible(kernel)
    s = _gth(kernel.dense(), max(_bandwidth(kernel), 1))
    return _finish(kernel, s, "dense", 0, residual_tol)


def solve_power(
    kernel: TransitionKernel,
    tol: float = POWER_TOL,
    max_iters: int = POWER_MAX_ITERS,
    residual_tol: float = RESIDUAL_TOL,
) -> StationaryDistribution:
    """Power iteration from the uniform distribution until the L1 step change is below ``tol``."""
    _require_irreducible(kernel)
    Tt = kernel.matrix.T.tocsr()
    s = np.full(kernel.size, 1.0 / kernel.size)
    change = np.inf
    for it in range(1, max_iters + 1):
        nxt = Tt @ s
        nxt /= nxt.sum()
        change = float(np.abs(nxt - s).sum())
        s = nxt
        if change < tol:
            log.debug("power iteration converged after %d steps", it)
            return _finish(kernel, s, "power", it, residual_tol)
    raise NonConvergenceError(
        f"power iteration did not converge in {max_iters} steps (last change {change:.3e})",
        residual=stationarity_residual(kernel, s),
        iterations=max_iters,
    )


def choose_method(kernel: TransitionKernel, dense_cap: int = DENSE_CAP) -> str:
    if kernel.n == 2 and kernel.spec is not None:
        return "birth-death"
    if kernel.size <= dense_cap:
        return "dense"
    return "power"


def solve(
    kernel: TransitionKernel,
    method: Method = "auto",
    *,
    tol: float = POWER_TOL,
    max_iters: int = POWER_MAX_ITERS,
    residual_tol: float = RESIDUAL_TOL,
    dense_cap: int = DENSE_CAP,
) -> StationaryDistribution:
    if method == "auto":
        method = choose_method(kernel, dense_cap)
    if method == "birth-death":
        return solve_birth_death(kernel, residual_tol)
    if method == "dense":
        return solve_dense(kernel, dense_cap, residual_tol)
    if method == "power":
        return solve_power(kernel, tol, max_iters, residual_tol)
    raise ValueError(f"unknown solver method {method!r}")
