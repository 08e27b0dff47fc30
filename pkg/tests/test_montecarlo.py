from math import log

import numpy as np
import pytest

from moranrte.entropy import entropy_rate
from moranrte.model import TransitionKernel, build_kernel
from moranrte.montecarlo import sample_return_trajectories
from moranrte.solver import solve

from conftest import spec


def coin_flip_return_moments(terms=200):
    """Exact return-path moments at state 0 of the uniform two-state chain.

    A return of length k has probability 2^-k, surprisal k log 2.
    """
    ks = np.arange(1, terms)
    p = 0.5**ks
    return float(np.sum(p * ks * log(2))), float(np.sum(p * ks))


def test_coin_flip_chain():
    k = TransitionKernel.from_matrix([[0.5, 0.5], [0.5, 0.5]])
    surprisal, length = coin_flip_return_moments()
    assert surprisal == pytest.approx(2 * log(2))
    assert length == pytest.approx(2.0)
    stats = sample_return_trajectories(k, 0, 100_000, seed=3)
    assert abs(stats.mean_surprisal - surprisal) <= 3 * stats.se_surprisal
    assert abs(stats.mean_length - length) <= 3 * stats.se_length


def test_deterministic_cycle():
    k = TransitionKernel.from_matrix([[0, 1], [1, 0]])
    stats = sample_return_trajectories(k, 1, 50, seed=0)
    assert stats.mean_surprisal == 0.0 and stats.se_surprisal == 0.0
    assert stats.mean_length == 2.0 and stats.truncated == 0


def test_neutral_moran_identity():
    k = build_kernel(spec(4, "neutral:2", 0.25, "linear"))
    s = solve(k)
    h = entropy_rate(k, s)
    v = k.index((2, 2))
    stats = sample_return_trajectories(k, (2, 2), 100_000, seed=11)
    assert stats.state == (2, 2)
    assert abs(stats.mean_surprisal - h / s[v]) <= 3 * stats.se_surprisal
    assert abs(stats.mean_length - 1 / s[v]) <= 3 * stats.se_length


def test_determinism_and_thread_independence():
    k = build_kernel(spec(5, "rps", 0.1))
    a = sample_return_trajectories(k, (2, 2, 1), 10_000, seed=5)
    b = sample_return_trajectories(k, (2, 2, 1), 10_000, seed=5)
    c = sample_return_trajectories(k, (2, 2, 1), 10_000, seed=5, threads=3)
    assert a == b == c
    assert sample_return_trajectories(k, (2, 2, 1), 10_000, seed=6) != a


def test_truncation_reported():
    k = build_kernel(spec(6, "hawk-dove", 0.01))
    stats = sample_return_trajectories(k, (6, 0), 2000, seed=1, max_steps=3)
    assert stats.truncated > 0
    assert stats.unreliable
    assert stats.to_dict()["truncated"] == stats.truncated


def test_rejects_bad_input():
    k = TransitionKernel.from_matrix([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ValueError):
        sample_return_trajectories(k, 0, 0)
    with pytest.raises(ValueError):
        sample_return_trajectories(build_kernel(spec(4, "hawk-dove", 0.0, "linear")), 0, 10)
