from collections import deque
from math import exp

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moranrte.model import (
    DegenerateStateError,
    GameMatrix,
    MutationSpec,
    ProcessSpec,
    SelectionSpec,
    TransitionKernel,
    build_kernel,
    reproduction_probabilities,
)
from moranrte.states import neighbor_indices, neighbors

from conftest import spec


def naive_kernel(sp):
    """Dictionary-based kernel written straight from the transition formula."""
    G, M, N, n = sp.game.entries, sp.mutation_matrix, sp.N, sp.n
    import itertools

    states = sorted((c for c in itertools.product(range(N + 1), repeat=n) if sum(c) == N), reverse=True)
    out = {}
    for a in states:
        x = [c / N for c in a]
        f = [sum(G[i][j] * x[j] for j in range(n)) for i in range(n)]
        if sp.selection.kind == "linear":
            phi = [x[i] * f[i] for i in range(n)]
        else:
            phi = [x[i] * exp(sp.selection.beta * f[i]) for i in range(n)]
        p = [sum(phi[k] * M[k][i] for k in range(n)) / sum(phi) for i in range(n)]
        row = {}
        for al in range(n):
            for be in range(n):
                if al != be and a[be] >= 1:
                    b = list(a)
                    b[al] += 1
                    b[be] -= 1
                    row[tuple(b)] = p[al] * x[be]
        row[a] = 1 - sum(row.values())
        out[a] = row
    return states, out


def test_reproduction_neutral_no_mutation():
    sp = spec(2, "neutral:2", 0.0, "linear")
    assert np.allclose(reproduction_probabilities((1, 1), sp), [0.5, 0.5], atol=1e-15)


def test_reproduction_neutral_half_mutation():
    sp = spec(2, "neutral:2", 0.5, "linear")
    assert np.allclose(reproduction_probabilities((1, 1), sp), [0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("game", ["hawk-dove", "neutral:2", "r-game:3"])
@pytest.mark.parametrize("mu", [0.0, 0.1, 0.37])
def test_reproduction_monomorphic(game, mu):
    p = reproduction_probabilities((2, 0), spec(2, game, mu, "fermi", 2.0))
    assert np.allclose(p, [1 - mu, mu], atol=1e-15)


def test_kernel_two_type_neutral_no_mutation():
    k = build_kernel(spec(2, "neutral:2", 0.0, "linear"))
    T = k.dense()
    assert T[1].tolist() == [0.25, 0.5, 0.25]
    assert T[0, 0] == 1.0
    assert not k.irreducible


def test_kernel_two_type_neutral_half_mutation():
    T = build_kernel(spec(2, "neutral:2", 0.5, "linear")).dense()
    assert T[0, 1] == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize(
    "sp",
    [
        spec(5, "hawk-dove", 0.1, "linear"),
        spec(6, "threetype", 0.05, "fermi", 0.7),
        spec(6, "rps", 1 / 6, "fermi", 1.3),
        spec(4, [[1, 2, 0.5, 1], [0.3, 1, 1, 2], [2, 1, 1, 1], [1, 1, 3, 0]], 0.2, "fermi", 0.4),
    ],
)
def test_kernel_matches_naive_construction(sp):
    k = build_kernel(sp)
    states, rows = naive_kernel(sp)
    assert [tuple(r) for r in k.states.tolist()] == states
    T = k.dense()
    for i, a in enumerate(states):
        for b, prob in rows[a].items():
            assert T[i, states.index(b)] == pytest.approx(prob, abs=1e-13)
        assert sum(rows[a].values()) == pytest.approx(1.0)


def test_kernel_row_access():
    k = build_kernel(spec(2, "neutral:2", 0.0, "linear"))
    assert k.row(1) == [(0, 0.25), (1, 0.5), (2, 0.25)]
    assert k.state(1).counts == (1, 1)
    assert k.index((0, 2)) == 2
    with pytest.raises(KeyError):
        k.index((1, 2))


games = st.integers(2, 4).flatmap(
    lambda n: st.lists(st.lists(st.floats(-3, 3), min_size=n, max_size=n), min_size=n, max_size=n)
)


@settings(max_examples=40, deadline=None)
@given(games, st.floats(1e-3, 1.0), st.floats(0, 10), st.integers(1, 30))
def test_rows_stochastic_and_closed(G, mu, beta, N):
    n = len(G)
    if n == 4:
        N = min(N, 15)
    k = build_kernel(ProcessSpec(N, GameMatrix(G), MutationSpec(mu=mu), SelectionSpec("fermi", beta)))
    T = k.matrix
    assert np.all(np.abs(np.asarray(T.sum(axis=1)).ravel() - 1) <= 1e-12)
    assert T.data.min() >= 0 and T.data.max() <= 1
    nb = neighbor_indices(k.states)
    for i in range(k.size):
        cols = set(T.indices[T.indptr[i] : T.indptr[i + 1]].tolist()) - {i}
        assert cols <= set(nb[i][nb[i] >= 0].tolist())
        assert T.indptr[i + 1] - T.indptr[i] <= n * (n - 1) + 1


def bfs_strongly_connected(T):
    m = T.shape[0]
    for graph in (T, T.T.tocsr()):
        seen = {0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in graph.indices[graph.indptr[i] : graph.indptr[i + 1]]:
                if j not in seen:
                    seen.add(int(j))
                    queue.append(int(j))
        if len(seen) != m:
            return False
    return True


@pytest.mark.parametrize("sp", [spec(8, "rps", 0.01), spec(10, "hawk-dove", 0.2), spec(5, "threetype", 1e-6, "fermi", 3)])
def test_irreducible_with_mutation(sp):
    k = build_kernel(sp)
    assert k.irreducible
    assert bfs_strongly_connected(k.matrix.tocsr())


def test_reducible_without_mutation():
    k = build_kernel(spec(6, "rps", 0.0))
    assert not k.irreducible
    assert not bfs_strongly_connected(k.matrix.tocsr())


@pytest.mark.parametrize("c", [-2.5, 0.3, 7.0])
def test_fermi_constant_shift_invariance(c):
    G = np.array([[0.0, 1, 2], [1, 0.5, 0], [2, 1, 0]])
    a = build_kernel(ProcessSpec(9, GameMatrix(G), MutationSpec(mu=0.05), SelectionSpec("fermi", 1.7)))
    b = build_kernel(ProcessSpec(9, GameMatrix(G + c), MutationSpec(mu=0.05), SelectionSpec("fermi", 1.7)))
    assert np.max(np.abs(a.dense() - b.dense())) <= 1e-12


def test_permutation_equivariance():
    G = np.array([[0.0, 1, 2], [1, 0.5, 0], [2, 1, 0.3]])
    M = np.array([[0.9, 0.06, 0.04], [0.02, 0.95, 0.03], [0.1, 0.1, 0.8]])
    perm = [2, 0, 1]
    a = build_kernel(ProcessSpec(7, GameMatrix(G), MutationSpec(matrix=M), SelectionSpec("fermi", 0.8)))
    b = build_kernel(
        ProcessSpec(7, GameMatrix(G[np.ix_(perm, perm)]), MutationSpec(matrix=M[np.ix_(perm, perm)]), SelectionSpec("fermi", 0.8))
    )
    # state a in the original corresponds to a[perm] in the permuted process
    Ta, Tb = a.dense(), b.dense()
    image = [b.index(row[perm]) for row in a.states]
    assert np.max(np.abs(Ta - Tb[np.ix_(image, image)])) <= 1e-12


def test_linear_selection_rejects_negative_fitness():
    with pytest.raises(DegenerateStateError, match="fermi"):
        build_kernel(spec(6, "rps", 0.1, "linear"))


def test_linear_selection_rejects_vanishing_weights():
    # the corner of the three-type game has zero payoff for the only type present
    with pytest.raises(DegenerateStateError, match="vanish"):
        build_kernel(spec(6, "threetype", 0.1, "linear"))


def test_uniform_mutation_expansion():
    M = MutationSpec(mu=0.3).expand(4)
    assert np.allclose(M.sum(axis=1), 1, atol=1e-12)
    assert M[0, 0] == pytest.approx(0.7) and M[0, 1] == pytest.approx(0.1)


@pytest.mark.parametrize(
    "kwargs",
    [dict(mu=1.5), dict(mu=-0.1), dict(matrix=[[0.5, 0.6], [0.5, 0.5]]), dict(), dict(mu=0.1, matrix=[[1, 0], [0, 1]])],
)
def test_mutation_validation(kwargs):
    with pytest.raises(ValueError):
        MutationSpec(**kwargs)


def test_spec_validation():
    with pytest.raises(ValueError):
        ProcessSpec(0, GameMatrix.hawk_dove(), MutationSpec(mu=0.1))
    with pytest.raises(ValueError):
        ProcessSpec(5, GameMatrix.hawk_dove(), MutationSpec(matrix=np.eye(3)))
    with pytest.raises(ValueError):
        GameMatrix([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(ValueError):
        GameMatrix([[1, np.inf], [0, 1]])
    with pytest.raises(ValueError):
        SelectionSpec("softmax")
    with pytest.raises(ValueError):
        GameMatrix.preset("prisoners")


def test_from_matrix_validation():
    with pytest.raises(ValueError):
        TransitionKernel.from_matrix([[0.5, 0.4], [0.5, 0.5]])
    k = TransitionKernel.from_matrix([[0, 1], [1, 0]])
    assert k.irreducible and k.size == 2


def test_kernel_is_immutable():
    k = build_kernel(spec(4, "hawk-dove", 0.1))
    with pytest.raises(ValueError):
        k.states[0, 0] = 3
