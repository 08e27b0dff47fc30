import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moranrte.states import (
    PopulationState,
    enumerate_states,
    neighbor_indices,
    neighbors,
    num_states,
    rank,
    rank_array,
    state_array,
    unrank,
)


def brute_force(N, n):
    comps = [c for c in itertools.product(range(N + 1), repeat=n) if sum(c) == N]
    return sorted(comps, reverse=True)


def test_two_types_listing():
    assert [s.counts for s in enumerate_states(2, 2)] == [(2, 0), (1, 1), (0, 2)]


def test_single_individual_three_types():
    assert [s.counts for s in enumerate_states(1, 3)] == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_count_n60_three_types():
    states = enumerate_states(60, 3)
    assert len(states) == comb(62, 2) == 1891
    assert [s.counts for s in states] == brute_force(60, 3)


@pytest.mark.parametrize("N,n", [(1, 2), (5, 2), (4, 3), (7, 4), (3, 5)])
def test_matches_brute_force(N, n):
    assert [tuple(r) for r in state_array(N, n).tolist()] == brute_force(N, n)
    assert num_states(N, n) == len(brute_force(N, n))


@pytest.mark.parametrize("N,n", [(0, 2), (3, 1), (-1, 3)])
def test_rejects_bad_dimensions(N, n):
    with pytest.raises(ValueError):
        enumerate_states(N, n)


@given(st.integers(1, 12), st.integers(2, 5), st.data())
def test_rank_unrank_roundtrip(N, n, data):
    i = data.draw(st.integers(0, num_states(N, n) - 1))
    counts = unrank(i, N, n)
    assert sum(counts) == N and len(counts) == n
    assert rank(counts) == i
    assert rank_array(np.array([counts]))[0] == i


def test_rank_array_is_identity_on_canonical_order():
    states = state_array(9, 4)
    assert np.array_equal(rank_array(states), np.arange(len(states)))


def test_neighbors_examples():
    assert set(s.counts for s in neighbors((1, 1))) == {(2, 0), (0, 2)}
    assert set(s.counts for s in neighbors((2, 0, 1))) == {(3, 0, 0), (1, 1, 1), (2, 1, 0), (1, 0, 2)}
    assert set(s.counts for s in neighbors(PopulationState.of((5, 0, 0, 0)))) == {(4, 1, 0, 0), (4, 0, 1, 0), (4, 0, 0, 1)}


def test_neighbors_exclude_self_and_are_distinct():
    for row in state_array(5, 3):
        nb = [s.counts for s in neighbors(tuple(row))]
        assert tuple(row) not in nb
        assert len(nb) == len(set(nb))


def test_neighbor_indices_agree_with_neighbors():
    states = state_array(6, 3)
    idx = neighbor_indices(states)
    for i, row in enumerate(states):
        got = {tuple(states[j]) for j in idx[i] if j >= 0}
        assert got == {s.counts for s in neighbors(tuple(row))}


def test_population_state_validation():
    s = PopulationState.of([3, 1])
    assert s.N == 4 and s.n == 2
    assert np.allclose(s.distribution, [0.75, 0.25])
    with pytest.raises(ValueError):
        PopulationState.of([3])
    with pytest.raises(ValueError):
        PopulationState.of([3, -1])
