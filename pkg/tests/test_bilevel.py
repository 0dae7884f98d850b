import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilevelcut.bilevel import (
    C1, C2B, C2C, NOT_IN_P2, BilevelOracle, best_ub, check_feasibility,
    classify_relaxation_solution, compute_big_m, find_improving_direction, phi, reaction,
)
from bilevelcut.frontend.generators import den2_like, den_like, moore_bard, zhang_like
from bilevelcut.model import Point

from oracle_utils import lattice, naive_feasible, naive_phi


@pytest.mark.parametrize("x,expected", [(2, 2), (3, 1), (0, math.inf), (1.5, 2)])
def test_moore_bard_value_function(mb, x, expected):
    assert phi(mb, [x]) == expected


def test_moore_bard_reaction(mb):
    np.testing.assert_array_equal(reaction(mb, [2]), [2])
    assert reaction(mb, [0]) is None


@pytest.mark.parametrize("gamma,expected", [(2, ((2, 2), -22)), (8, ((8, 1), -18)), (0, None)])
def test_moore_bard_fixed_linking(mb, gamma, expected):
    got = best_ub(mb, [gamma])
    if expected is None:
        assert got is None
        return
    p, val = got
    np.testing.assert_array_equal(p.z, expected[0])
    assert val == expected[1]


def test_moore_bard_root_vertex_is_C3(mb):
    v = check_feasibility(mb, Point([2], [4]))
    assert C2C in v.flags and not v.feasible
    np.testing.assert_array_equal(v.certificate.y, [2])
    assert classify_relaxation_solution(mb, Point([2], [4])) == "C3"


def test_moore_bard_direction_and_big_m(mb):
    cert = find_improving_direction(mb, Point([2], [4]))
    np.testing.assert_array_equal(cert.dy, [-1])
    assert compute_big_m(mb, [2]) == pytest.approx(2)


def test_modified_leader_gives_C1_without_direction():
    inst = moore_bard(leader=(3.0, -1.0))
    p = Point([0], [1.5])
    assert classify_relaxation_solution(inst, p) == "C1"
    assert find_improving_direction(inst, p) is None
    v = check_feasibility(inst, p)
    # phi(0) is infinite: no follower response, hence no improving solution either
    assert v.flags == {C2B, C2C} and v.certificate is None and v.phi_value == math.inf


def test_point_outside_follower_region(mb):
    assert NOT_IN_P2 in check_feasibility(mb, Point([2], [0])).flags


def test_calls_are_cached(mb):
    o = BilevelOracle(mb)
    o.phi([2]); o.phi([2.0]); o.best_ub([2]); o.best_ub([2])
    assert o.calls["second_level"] == 1 and o.calls["ub"] == 1
    assert o.events == [("ub", (2.0,))]


families = st.sampled_from([
    lambda s: den_like(n1=2, n2=2, m2=2, seed=s, bound=3),
    lambda s: den2_like(n1=2, n2=2, m2=2, seed=s, bound=3),
    lambda s: zhang_like(n1=2, n2=2, m2=2, seed=s, bound=3),
])


@settings(max_examples=40, deadline=None)
@given(families, st.integers(0, 10**6))
def test_phi_and_feasibility_match_naive(make, seed):
    inst = make(seed)
    o = BilevelOracle(inst)
    for x in lattice(inst.lx, inst.ux):
        assert o.phi(x) == naive_phi(inst, x)
        for y in lattice(inst.ly, inst.uy):
            assert o.check_feasibility(Point(x, y), certificate=False).feasible == naive_feasible(inst, x, y)


@settings(max_examples=40, deadline=None)
@given(families, st.integers(0, 10**6), st.data())
def test_certificates_are_genuine(make, seed, data):
    inst = make(seed)
    o = BilevelOracle(inst)
    x = np.array([data.draw(st.integers(int(a), int(b))) for a, b in zip(inst.lx, inst.ux)], float)
    y = np.array([data.draw(st.integers(int(a), int(b))) for a, b in zip(inst.ly, inst.uy)], float)
    v = o.check_feasibility(Point(x, y))
    if v.certificate is not None:
        ys = v.certificate.y
        assert np.all(inst.A2 @ x + inst.G2 @ ys >= inst.b2 - 1e-9)
        assert inst.d2 @ ys < inst.d2 @ y - 1e-9
    cert = o.find_improving_direction(Point(x, y))
    if cert is not None:
        dy = cert.dy
        assert np.allclose(dy, np.round(dy))
        assert inst.d2 @ dy <= -1 + 1e-9
        yn = y + dy
        if np.all(inst.A2 @ x + inst.G2 @ y >= inst.b2 - 1e-9):
            assert np.all(inst.A2 @ x + inst.G2 @ yn >= inst.b2 - 1e-9)
            assert np.all((yn >= inst.ly - 1e-9) & (yn <= inst.uy + 1e-9))


@settings(max_examples=30, deadline=None)
@given(families, st.integers(0, 10**6))
def test_fixed_linking_matches_naive(make, seed):
    inst = make(seed)
    o = BilevelOracle(inst)
    L = inst.L_arr
    for x in lattice(inst.lx, inst.ux):
        got = o.best_ub(x[L])
        best = math.inf
        for xx in lattice(inst.lx, inst.ux):
            if not np.array_equal(xx[L], x[L]):
                continue
            for y in lattice(inst.ly, inst.uy):
                if naive_feasible(inst, xx, y):
                    best = min(best, inst.c @ xx + inst.d1 @ y)
        if math.isinf(best):
            assert got is None
        else:
            assert got is not None and got[1] == pytest.approx(best)
            assert naive_feasible(inst, got[0].x, got[0].y)


def test_fractional_leader_flagged(mb):
    assert C1 in check_feasibility(mb, Point([1.5], [2])).flags
