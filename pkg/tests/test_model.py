import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilevelcut.frontend.generators import moore_bard_raw
from bilevelcut.model import (
    MiblpInstance, ModelError, RawInstance, canonicalize, check_assumptions,
    interdiction_instance, raw_feasible,
)


def test_moore_bard_canonical_rows(mb):
    # follower rows -5x+4y<=6, x+2y<=10, 2x-y<=15, 2x+10y>=15
    np.testing.assert_array_equal(mb.A2, [[5], [-1], [-2], [2]])
    np.testing.assert_array_equal(mb.G2, [[-4], [-2], [1], [10]])
    np.testing.assert_array_equal(mb.b2, [-6, -10, -15, 15])
    assert mb.L == (0,)
    assert (mb.n1, mb.n2, mb.r1, mb.r2) == (1, 1, 1, 1)


def test_arrays_are_read_only(mb):
    with pytest.raises(ValueError):
        mb.A2[0, 0] = 3.0


def test_continuous_linking_variable_rejected():
    with pytest.raises(ModelError, match="linking"):
        MiblpInstance(n1=1, n2=1, r1=0, r2=1, c=[1], d1=[1], d2=[1], A1=None, G1=None, b1=[],
                      A2=[[1]], G2=[[1]], b2=[0], lx=[0], ux=[1], ly=[0], uy=[1])


def test_declared_linking_set_must_match():
    with pytest.raises(ModelError, match="linking set"):
        MiblpInstance(n1=2, n2=1, r1=2, r2=1, c=[1, 1], d1=[1], d2=[1], A1=None, G1=None, b1=[],
                      A2=[[1, 0]], G2=[[1]], b2=[0], lx=[0, 0], ux=[1, 1], ly=[0], uy=[1], L=(0, 1))


def test_missing_upper_bound_rejected():
    raw = moore_bard_raw()
    raw.uy = None
    with pytest.raises(ModelError):
        canonicalize(raw)


def test_bad_sense_rejected():
    raw = moore_bard_raw()
    raw.senses2 = ["<=", "<=", "<=", "~"]
    with pytest.raises(ModelError):
        canonicalize(raw)


def test_canonicalize_is_identity_on_canonical(mb):
    assert canonicalize(mb) is mb


def test_max_senses_are_negated():
    raw = moore_bard_raw()
    raw.leader_sense, raw.follower_sense = "max", "max"
    inst = canonicalize(raw)
    np.testing.assert_array_equal(inst.c, [1])
    np.testing.assert_array_equal(inst.d1, [10])
    np.testing.assert_array_equal(inst.d2, [-1])


def test_integer_variables_are_moved_first():
    raw = RawInstance(c=[1, 2], d1=[0, 1], d2=[3, 4], A2=[[0, 1]], G2=[[1, 1]], b2=[1],
                      ux=[5, 5], uy=[5, 5], x_integer=[False, True], y_integer=[False, True])
    inst = canonicalize(raw)
    np.testing.assert_array_equal(inst.c, [2, 1])
    np.testing.assert_array_equal(inst.d2, [4, 3])
    assert inst.x_names == ("x1", "x0") and inst.r1 == 1 and inst.L == (0,)


def test_assumption_check_detects_improving_ray():
    inst = MiblpInstance(n1=1, n2=1, r1=1, r2=1, c=[0], d1=[0], d2=[-1], A1=None, G1=None, b1=[],
                         A2=[[1]], G2=[[1]], b2=[0], lx=[0], ux=[1], ly=[0], uy=[3])
    rep = check_assumptions(inst)
    assert not rep.ok and not rep.no_unbounded_ray


def test_assumption_check_accepts_moore_bard(mb):
    assert check_assumptions(mb).ok


def test_interdiction_structure(toy):
    # follower: G y >= g plus -y_i - u_i x_i >= -u_i
    np.testing.assert_array_equal(toy.A2, [[0, 0], [-1, 0], [0, -1]])
    np.testing.assert_array_equal(toy.G2, [[-1, -1], [-1, 0], [0, -1]])
    np.testing.assert_array_equal(toy.d2, [-3, -2])
    np.testing.assert_array_equal(toy.d1, [3, 2])
    assert toy.L == (0, 1)
    assert not np.signbit(toy.A2[toy.A2 == 0]).any()


senses = st.sampled_from([">=", "<=", "="])


@st.composite
def raw_instances(draw):
    n1 = draw(st.integers(1, 2))
    n2 = draw(st.integers(1, 2))
    m1 = draw(st.integers(0, 2))
    m2 = draw(st.integers(1, 3))
    ints = st.integers(-4, 4)
    mat = lambda m, n: [[draw(ints) for _ in range(n)] for _ in range(m)]
    return RawInstance(
        c=[draw(ints) for _ in range(n1)], d1=[draw(ints) for _ in range(n2)], d2=[draw(ints) for _ in range(n2)],
        A1=mat(m1, n1), G1=mat(m1, n2), b1=[draw(ints) for _ in range(m1)], senses1=[draw(senses) for _ in range(m1)],
        A2=mat(m2, n1), G2=mat(m2, n2), b2=[draw(ints) for _ in range(m2)], senses2=[draw(senses) for _ in range(m2)],
        ux=[3] * n1, uy=[3] * n2,
        x_integer=[True] * n1, y_integer=[draw(st.booleans()) for _ in range(n2)],
    )


@settings(max_examples=150, deadline=None)
@given(raw_instances(), st.data())
def test_canonical_rows_match_raw_membership(raw, data):
    inst = canonicalize(raw)
    n1, n2 = len(raw.c), len(raw.d2)
    x = np.array([data.draw(st.integers(0, 3)) for _ in range(n1)], float)
    y = np.array([data.draw(st.integers(0, 3)) for _ in range(n2)], float)
    yi = np.asarray(raw.y_integer)
    py = np.concatenate([np.flatnonzero(yi), np.flatnonzero(~yi)])
    z = np.concatenate([x, y[py]])
    M, rhs = inst.all_rows()
    assert raw_feasible(raw, x, y) == bool(np.all(M @ z >= rhs - 1e-9))
    # objectives are carried along with the permutation
    assert np.dot(raw.d2, y) == pytest.approx(inst.d2 @ y[py])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_interdiction_instance_valid(k, seed):
    rng = np.random.default_rng(seed)
    d = rng.integers(1, 10, k)
    inst = interdiction_instance(A=-np.ones((1, k)), b=[-1], G=-rng.integers(1, 5, (1, k)), g=[-6], d=d, u=np.ones(k))
    assert inst.L == tuple(range(k))
    assert check_assumptions(inst).ok
    np.testing.assert_array_equal(inst.d2, -d)
