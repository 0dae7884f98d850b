import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bilevelcut import bruteforce as bf
from bilevelcut import cuts as C
from bilevelcut.bilevel import BilevelOracle
from bilevelcut.frontend.generators import den2_like, den_like, knapsack_interdiction, zhang_like
from bilevelcut.simplex import ConeRays, solve_lp

from conftest import relaxation


def as_tuple(cut):
    return tuple(cut.alpha.tolist()) + (cut.beta,)


def test_integer_no_good_at_moore_bard_root(mb, mb_root):
    cut = C.gen_integer_no_good(mb, mb_root)
    # -2x + 3y <= 7
    assert as_tuple(cut) == (2.0, -3.0, -7.0)
    assert cut.violation(mb_root.x) > 0


def test_weighted_integer_no_good(mb, mb_root):
    from bilevelcut.simplex import extract_cone

    cone = extract_cone(mb_root.problem, mb_root)
    # weights follow the binding rows' order; find the one with G-coefficient -4
    w = np.where(cone.binding_rows[:, 1] == -4, 14.0, 70.0)
    cut = C.gen_integer_no_good(mb, mb_root, weights=w)
    assert as_tuple(cut) == (0.0, -1.0, -3.0)


def test_isic_types_at_moore_bard_root(mb, mb_root):
    o = BilevelOracle(mb)
    c1 = C.gen_isic_type1(mb, mb_root, o.check_feasibility(C._point(mb, mb_root)).certificate.y)
    c2 = C.gen_isic_type2(mb, mb_root, o)
    for cut in (c1, c2):
        assert as_tuple(cut) == (0.0, -1.0, -2.0)
        pts = sorted(tuple(np.round(p, 9)) for p in cut.meta["points"])
        assert pts == [(0.4, 2.0), (6.0, 2.0)]


def test_idic_at_moore_bard_root(mb, mb_root):
    cut = C.gen_idic(mb, mb_root)
    # 37x + 214y <= 510
    assert as_tuple(cut) == (-37.0, -214.0, -510.0)
    for p in cut.meta["points"]:
        assert cut.lhs(p) == pytest.approx(cut.beta, abs=1e-6)


def test_isic_idic_non_dominance(mb, mb_root):
    isic = C.gen_isic_type1(mb, mb_root, [2.0])
    idic = C.gen_idic(mb, mb_root)
    M, rhs = mb.all_rows()
    # both witnesses lie in the relaxation; w1 is cut by the ISIC only, w2 by the IDIC only
    w1 = np.array([1.0, 2.1])
    w2 = np.array([3.0, 2.0])
    for w in (w1, w2):
        assert np.all(M @ w >= rhs)
    assert not isic.satisfied(w1) and idic.satisfied(w1)
    assert isic.satisfied(w2) and not idic.satisfied(w2)


def test_hypercube_at_integral_vertex(mb):
    cut = C.gen_hypercube_ic(mb, solve_lp(relaxation(mb)), ub_solved=True)
    assert as_tuple(cut) == (3.0, -8.0, -19.0)
    assert cut.scope == C.LINKING_EXCLUDING and cut.gamma == (2,)
    pts = sorted(tuple(np.round(p, 9)) for p in cut.meta["points"])
    assert pts == [(1.0, 2.75), (3.0, 3.5)]


def test_hypercube_requires_solved_fixed_problem(mb, mb_root):
    with pytest.raises(RuntimeError):
        C.gen_hypercube_ic(mb, mb_root, ub_solved=False)


def test_benders_interdiction_toy(toy):
    lp = solve_lp(relaxation(toy).with_bounds(np.zeros(4), np.zeros(4)))
    o = BilevelOracle(toy)
    ystar = o.reaction([0, 0])
    Lp, Lm = C.interdiction_sign_sets(toy)
    cut = C.gen_benders_interdiction(toy, lp, ystar, o.big_m_interdiction(ystar, Lp, Lm))
    # 3 x1 + 3 y1 + 2 y2 >= 3
    assert as_tuple(cut) == (3.0, 0.0, 3.0, 2.0, 3.0)
    for p in bf.enumerate(toy).points():
        assert cut.satisfied(p)
    assert not cut.satisfied(np.zeros(4))


def test_generalized_no_good(toy):
    cut = C.gen_generalized_no_good(toy, (1, 0), ub_solved=True)
    assert as_tuple(cut) == (-1.0, 1.0, 0.0, 0.0, 0.0)
    assert cut.scope == C.LINKING_EXCLUDING and cut.gamma == (1, 0)
    assert not cut.satisfied([1, 0, 0, 0])
    with pytest.raises(RuntimeError):
        C.gen_generalized_no_good(toy, (1, 0), ub_solved=False)


def test_not_applicable_reasons(mb, mb_root):
    assert C.gen_benders_binary(mb, mb_root, [2.0], 2.0).reason == C.NOT_APPLICABLE
    assert C.gen_benders_interdiction(mb, mb_root, [2.0], 2.0).reason == C.NOT_APPLICABLE
    assert C.gen_isic_type1(mb, mb_root, None).reason == C.NO_CERTIFICATE
    assert not C.CutFailure(C.NUMERICS)


def test_vertex_on_bfs_boundary_is_no_certificate(mb, mb_root):
    from bilevelcut.simplex import extract_cone

    cone = extract_cone(mb_root.problem, mb_root)
    bfs = C.BfsSet(np.array([[0.0, -1.0]]), np.array([-4.0]))
    assert C.intersection_cut(cone, bfs, mb).reason == C.NO_CERTIFICATE


def test_cone_contained():
    cone = ConeRays(np.zeros(2), [np.array([1.0, 0.0]), np.array([0.0, 1.0])], np.eye(2), np.zeros(2), [0, 1])
    bfs = C.BfsSet(np.array([[1.0, 0.0]]), np.array([-1.0]))
    assert C.intersection_cut(cone, bfs).reason == C.CONE_CONTAINED


def test_ray_noise_is_not_a_crossing():
    # second ray is parallel to the facet y <= 2 up to factorization noise
    r2 = np.array([1.0, -1.7e-13])
    cone = ConeRays(np.zeros(2), [np.array([0.0, 1.0]), r2], np.eye(2), np.zeros(2), [0, 1])
    bfs = C.BfsSet(np.array([[0.0, -10.0]]), np.array([-20.0]))
    cut = C.intersection_cut(cone, bfs)
    assert np.isinf(cut.meta["lambda"][1])
    assert len(cut.meta["points"]) == 1
    np.testing.assert_allclose(cut.alpha, [0.0, 0.5], atol=1e-12)
    assert cut.beta == pytest.approx(1.0)

@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=2, max_size=5), st.integers(-99, 99), st.integers(1, 7))
def test_normalize_gives_coprime_integers(coefs, beta, scale):
    assume(any(coefs))
    a = np.array(coefs, float) / scale
    ax, ay, b = C.normalize(a, beta / scale, 1)
    out = np.concatenate([ax, ay])
    assert np.allclose(out, np.round(out))
    ints = [abs(int(v)) for v in out if v] + ([abs(int(b))] if b else [])
    assert math.gcd(*ints) == 1
    # same half-space: positive multiple of the input
    k = out[np.flatnonzero(out)[0]] / a[np.flatnonzero(a)[0]]
    assert k > 0
    assert np.allclose(out, k * a) and b == pytest.approx(k * beta / scale)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_intersection_cut_geometry(n, seed):
    rng = np.random.default_rng(seed)
    R = rng.normal(size=(n, n))
    assume(abs(np.linalg.det(R)) > 1e-2)
    v = rng.normal(size=n)
    H = rng.normal(size=(n + 2, n))
    h = H @ v - rng.uniform(0.5, 2.0, n + 2)
    cone = ConeRays(v, [R[:, j] / np.abs(R[:, j]).max() for j in range(n)], np.eye(n), np.zeros(n), list(range(n)))
    cut = C.intersection_cut(cone, C.BfsSet(H, h))
    if not cut:
        assert cut.reason == C.CONE_CONTAINED
        return
    assert cut.violation(v) > 0
    for p in cut.meta["points"]:
        assert cut.lhs(p) == pytest.approx(cut.beta, abs=1e-6)
        assert np.all(H @ p >= h - 1e-7)


def _instances():
    return st.sampled_from([
        lambda s: den_like(n1=2, n2=2, m2=2, seed=s, bound=4),
        lambda s: den2_like(n1=2, n2=2, m2=2, seed=s, bound=4),
        lambda s: zhang_like(n1=2, n2=2, m2=2, seed=s, bound=3),
        lambda s: knapsack_interdiction(k=3, seed=s),
    ])


@settings(max_examples=120, deadline=None)
@given(_instances(), st.integers(0, 10**6), st.data())
def test_cuts_valid_at_random_vertices(make, seed, data):
    """Cuts generated at a vertex of a random box restriction keep every
    bilevel feasible point of the box (and of the linking scope)."""
    inst = make(seed)
    enum = bf.enumerate(inst)
    lo, up = inst.lower(), inst.upper()
    j = data.draw(st.integers(0, inst.n - 1))
    cut_at = data.draw(st.integers(int(lo[j]), int(up[j])))
    if data.draw(st.booleans()):
        up[j] = cut_at
    else:
        lo[j] = cut_at
    lp = solve_lp(relaxation(inst).with_bounds(lo, up))
    assume(lp.optimal)
    o = BilevelOracle(inst)
    p = C._point(inst, lp)
    v = o.check_feasibility(p)
    # the solver only separates vertices that are not bilevel feasible
    assume(not v.feasible)
    ystar = v.certificate.y if v.certificate is not None else None
    gens = [
        lambda: C.gen_integer_no_good(inst, lp),
        lambda: C.gen_isic_type1(inst, lp, ystar),
        lambda: C.gen_isic_type2(inst, lp, o),
        lambda: C.gen_idic(inst, lp, o),
    ]
    if ystar is not None:
        gens.append(lambda: C.gen_benders_binary(inst, lp, ystar, o.big_m(ystar)))
        if inst.interdiction is not None:
            Lp, Lm = C.interdiction_sign_sets(inst)
            gens.append(lambda: C.gen_benders_interdiction(inst, lp, ystar, o.big_m_interdiction(ystar, Lp, Lm)))
    L = inst.L_arr
    if np.allclose(lp.x[L], np.round(lp.x[L])):
        o.best_ub(lp.x[L])
        gens.append(lambda: C.gen_hypercube_ic(inst, lp, True))
    box = (lo, up)
    for g in gens:
        cut = g()
        if not cut:
            continue
        if cut.scope != C.GLOBAL or cut.origin in ("integer_no_good", "isic1", "isic2", "idic", "hypercube"):
            cut.domain = box
        if cut.scope == C.LINKING_EXCLUDING:
            cut.excluded = (cut.gamma,)
        assert len(bf.scope_violations(inst, enum, cut)) == 0, cut.origin
        assert cut.violation(lp.x) >= 1e-6 * max(1.0, np.abs(cut.alpha).max()), cut.origin
