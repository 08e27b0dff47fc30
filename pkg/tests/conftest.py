import math
import threading

import numpy as np
import pytest

import moranrte.solver as solver_module
from moranrte.entropy import TIE_RTOL, entropy_rate, entropy_rate_bound
from moranrte.model import GameMatrix, MutationSpec, ProcessSpec, SelectionSpec

ACCEPTANCE = {}

# One entry per Moran-process stationary solve anywhere in the session:
# (description, n, H, bound holds, RTE*s == H, argmax s == argmin RTE)
PROCESSES = []
_lock = threading.Lock()
_EPS = np.finfo(float).eps


def spec(N, game, mu, selection="fermi", beta=1.0):
    g = GameMatrix.preset(game) if isinstance(game, str) else GameMatrix(np.asarray(game, dtype=float))
    return ProcessSpec(N, g, MutationSpec(mu=mu), SelectionSpec(selection, beta))


@pytest.fixture
def hawk_dove():
    return spec(30, "hawk-dove", 1 / 30, "fermi", 1.0)


def _audit(kernel, dist):
    p = dist.probabilities
    h = entropy_rate(kernel, p)
    rtes = h / p
    n = kernel.n
    bound_ok = 0.0 <= h <= entropy_rate_bound(n)
    identity_ok = bool(np.all(np.abs(rtes * p - h) <= 4 * _EPS * h))
    # orbit members differ by an ulp or two, so ties use the extremum tolerance
    argmax = set(np.flatnonzero(p >= p.max() * (1 - TIE_RTOL)).tolist())
    argmin = set(np.flatnonzero(rtes <= rtes.min() * (1 + TIE_RTOL)).tolist())
    sp = kernel.spec
    desc = f"N={sp.N} n={n} mu={sp.mutation.mu} {sp.selection.kind} beta={sp.selection.beta}"
    with _lock:
        PROCESSES.append((desc, n, h, bound_ok, identity_ok, argmax == argmin))


@pytest.fixture(scope="session", autouse=True)
def audit_every_solve():
    original = solver_module._finish

    def finish(kernel, *args, **kwargs):
        dist = original(kernel, *args, **kwargs)
        if kernel.spec is not None:
            _audit(kernel, dist)
        return dist

    solver_module._finish = finish
    yield
    solver_module._finish = original


def pytest_collection_modifyitems(items):
    # the bounds audit looks at every process built before it, so it runs last
    last = [it for it in items if "audit" in it.keywords]
    rest = [it for it in items if "audit" not in it.keywords]
    items[:] = rest + last


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=str):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
