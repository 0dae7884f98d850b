import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilevelcut.milp import MilpProblem, solve_milp
from bilevelcut.simplex import LpProblem


def enum_opt(p, integer):
    """Exhaustive optimum over a small pure-integer box."""
    best = np.inf
    for z in itertools.product(*[range(int(l), int(u) + 1) for l, u in zip(p.lo, p.up)]):
        z = np.array(z, float)
        if np.all(p.A @ z >= p.b - 1e-9):
            best = min(best, p.c @ z)
    return best


@st.composite
def pure_integer(draw):
    m = draw(st.integers(1, 4))
    n = draw(st.integers(1, 3))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    A = rng.integers(-6, 7, (m, n)).astype(float)
    b = rng.integers(-12, 6, m).astype(float)
    c = rng.integers(-5, 6, n).astype(float)
    return LpProblem(c, A, b, np.zeros(n), rng.integers(1, 6, n).astype(float))


@settings(max_examples=300, deadline=None)
@given(pure_integer())
def test_matches_enumeration(p):
    r = solve_milp(MilpProblem(p, np.arange(p.n)))
    best = enum_opt(p, None)
    if np.isinf(best):
        assert r.status == "infeasible"
    else:
        assert r.status == "optimal"
        assert r.objective == pytest.approx(best)
        assert np.allclose(r.x, np.round(r.x))


@settings(max_examples=100, deadline=None)
@given(pure_integer(), st.integers(-10, 10))
def test_cutoff_semantics(p, k):
    full = solve_milp(MilpProblem(p, np.arange(p.n)))
    r = solve_milp(MilpProblem(p, np.arange(p.n), cutoff=float(k)))
    # an empty feasible set has optimum +inf, which also exceeds the cutoff
    if full.status == "optimal" and full.objective <= k - 1e-6:
        assert r.status == "optimal" and r.objective == pytest.approx(full.objective)
    else:
        assert r.status == "cutoff_exceeded" and not r.found


def test_mixed_integer_against_scipy():
    from scipy.optimize import Bounds, LinearConstraint, milp

    rng = np.random.default_rng(11)
    for _ in range(60):
        m, n = 4, 4
        A = rng.integers(-6, 7, (m, n)).astype(float)
        b = rng.integers(-15, 3, m).astype(float)
        c = rng.integers(-5, 6, n).astype(float)
        up = rng.integers(1, 6, n).astype(float)
        p = LpProblem(c, A, b, np.zeros(n), up)
        integ = np.array([1, 1, 0, 0])
        ref = milp(c, constraints=LinearConstraint(A, lb=b), bounds=Bounds(np.zeros(n), up), integrality=integ)
        r = solve_milp(MilpProblem(p, [0, 1]))
        if ref.status == 2:
            assert r.status == "infeasible"
        else:
            assert r.status == "optimal"
            assert r.objective == pytest.approx(ref.fun, abs=1e-6)


def test_integer_index_out_of_range():
    p = LpProblem(np.ones(1), np.ones((1, 1)), np.zeros(1), np.zeros(1), np.ones(1))
    with pytest.raises(ValueError):
        MilpProblem(p, [3])


def test_node_limit_reports_limit():
    rng = np.random.default_rng(0)
    n = 8
    a = rng.integers(20, 40, n).astype(float)
    # knapsack-like with a fractional optimum everywhere
    p = LpProblem(-a, -a[None, :] * 1.0, np.array([-a.sum() / 2 - 0.5]), np.zeros(n), np.ones(n))
    r = solve_milp(MilpProblem(p, np.arange(n)), node_limit=2)
    assert r.status in ("limit", "optimal")
    assert r.nodes <= 3
