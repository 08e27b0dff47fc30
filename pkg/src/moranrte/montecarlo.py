"""Monte Carlo sampling of first-return trajectories.

Paths are drawn from their own distribution, so the mean surprisal
``-log Pr(path)`` estimates the return-path entropy ``H_vv`` and the mean
length estimates the expected return time ``1 / s(v)``.

Random streams: sample indices are cut into blocks of ``BLOCK`` consecutive
samples, and block ``b`` draws from ``SeedSequence(seed).spawn(...)[b]`` with
numpy's PCG64. Results therefore do not depend on how blocks are scheduled
across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .model import TransitionKernel

BLOCK = 4096
MAX_STEPS = 10**7
UNRELIABLE_FRACTION = 1e-3


@dataclass(frozen=True)
class TrajectoryStats:
    state: tuple
    samples: int
    mean_surprisal: float
    se_surprisal: float
    mean_length: float
    se_length: float
    truncated: int
    seed: int

    @property
    def unreliable(self) -> bool:
        return self.truncated > UNRELIABLE_FRACTION * self.samples

    def to_dict(self) -> dict:
        d = asdict(self)
        d["state"] = list(self.state)
        return d


class _RowSampler:
    """Per-row inverse-CDF tables, padded to the largest row degree."""

    def __init__(self, kernel: TransitionKernel):
        T = kernel.matrix
        degree = np.diff(T.indptr)
        width = int(degree.max())
        m = kernel.size
        self.targets = np.zeros((m, width), dtype=np.int64)
        self.cdf = np.ones((m, width))
        self.logp = np.zeros((m, width))
        for i in range(m):
            lo, hi = T.indptr[i], T.indptr[i + 1]
            d = hi - lo
            probs = T.data[lo:hi]
            self.targets[i, :d] = T.indices[lo:hi]
            self.targets[i, d:] = T.indices[hi - 1]
            self.cdf[i, :d] = np.cumsum(probs)
            self.logp[i, :d] = np.log(probs)
            self.logp[i, d:] = self.logp[i, d - 1]
        # guard against cumulative round-off below 1
        self.cdf[np.arange(m), degree - 1] = np.inf
        self.width = width

    def step(self, current: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        j = (u[:, None] >= self.cdf[current]).sum(axis=1)
        j = np.minimum(j, self.width - 1)
        return self.targets[current, j], self.logp[current, j]


def _sample_block(sampler: _RowSampler, origin: int, count: int, rng: np.random.Generator, max_steps: int):
    surprisal = np.zeros(count)
    length = np.zeros(count, dtype=np.int64)
    current = np.full(count, origin, dtype=np.int64)
    active = np.arange(count)
    steps = 0
    while active.size and steps < max_steps:
        nxt, logp = sampler.step(current[active], rng.random(active.size))
        surprisal[active] -= logp
        length[active] += 1
        current[active] = nxt
        active = active[nxt != origin]
        steps += 1
    done = np.ones(count, dtype=bool)
    done[active] = False
    return surprisal, length, done


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    k = len(values)
    if k == 0:
        return math.nan, math.nan
    mean = math.fsum(values) / k
    if k == 1:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (k - 1)
    return mean, math.sqrt(var / k)


def sample_return_trajectories(
    kernel: TransitionKernel,
    state: int | Sequence[int],
    samples: int,
    seed: int = 0,
    max_steps: int = MAX_STEPS,
    threads: int = 1,
) -> TrajectoryStats:
    """Sample ``samples`` first-return paths from ``state`` back to itself.

    ``state`` is a state index or a tuple of counts. A self-loop step is a
    return of length 1. Paths still running after ``max_steps`` are counted as
    truncated and left out of both means.
    """
    if samples < 1:
        raise ValueError(f"need at least one sample, got {samples}")
    if not kernel.irreducible:
        raise ValueError("return-path sampling needs an irreducible kernel")
    origin = state if isinstance(state, (int, np.integer)) else kernel.index(state)
    if not 0 <= origin < kernel.size:
        raise IndexError(f"state index {origin} out of range")

    sampler = _RowSampler(kernel)
    nblocks = -(-samples // BLOCK)
    streams = np.random.SeedSequence(seed).spawn(nblocks)

    def run(b: int):
        count = min(BLOCK, samples - b * BLOCK)
        return _sample_block(sampler, origin, count, np.random.Generator(np.random.PCG64(streams[b])), max_steps)

    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run, range(nblocks)))
    else:
        blocks = [run(b) for b in range(nblocks)]

    surprisal = np.concatenate([b[0] for b in blocks])
    length = np.concatenate([b[1] for b in blocks])
    done = np.concatenate([b[2] for b in blocks])
    ms, ses = _mean_se(surprisal[done])
    ml, sel = _mean_se(length[done].astype(float))
    return TrajectoryStats(
        state=tuple(int(c) for c in kernel.states[origin]),
        samples=samples,
        mean_surprisal=ms,
        se_surprisal=ses,
        mean_length=ml,
        se_length=sel,
        truncated=int((~done).sum()),
        seed=seed,
    )
