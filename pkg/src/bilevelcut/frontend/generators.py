"""Random instance families and a few fixed test instances."""

from __future__ import annotations

import math
import random

import numpy as np

from ..model import MiblpInstance, RawInstance, canonicalize, check_assumptions, interdiction_instance

FAMILIES = ("den_like", "den2_like", "zhang_like", "knapsack_interdiction")


def moore_bard_raw(leader=(-1.0, -10.0)):
    return RawInstance(
        c=[leader[0]], d1=[leader[1]], d2=[1.0],
        A2=[[-5], [1], [2], [2]], G2=[[4], [2], [-1], [10]], b2=[6, 10, 15, 15],
        senses2=["<=", "<=", "<=", ">="],
        lx=[0], ux=[10], ly=[0], uy=[10], name="moore_bard",
    )


def moore_bard(leader=(-1.0, -10.0)) -> MiblpInstance:
    return canonicalize(moore_bard_raw(leader))


def knapsack_toy() -> MiblpInstance:
    """Follower max 3y1 + 2y2, y1 + y2 <= 1; leader budget x1 + x2 <= 1."""
    return interdiction_instance(A=[[-1, -1]], b=[-1], G=[[-1, -1]], g=[-1], d=[3, 2], u=[1, 1], name="knapsack_toy")


def _retry(build, rng, tries=200):
    for _ in range(tries):
        inst = build(rng)
        if inst is not None and check_assumptions(inst).ok:
            return inst
    raise RuntimeError("could not draw an instance satisfying the assumptions")


def den_like(n1=2, n2=2, m2=3, seed=0, bound=8, coef=10) -> MiblpInstance:
    """Pure integer, no leader rows, follower rows in >= form with
    non-positive coefficients."""
    rng = random.Random(seed)

    def build(rng):
        A2 = [[-rng.randint(0, coef) for _ in range(n1)] for _ in range(m2)]
        G2 = [[-rng.randint(0, coef) for _ in range(n2)] for _ in range(m2)]
        if not any(any(r) for r in A2):
            A2[0][0] = -1
        b2 = [-rng.randint(coef, coef * bound) for _ in range(m2)]
        c = [rng.randint(-coef, coef) for _ in range(n1)]
        d1 = [rng.randint(-coef, coef) for _ in range(n2)]
        d2 = [rng.randint(-coef, coef) for _ in range(n2)]
        return canonicalize(RawInstance(
            c=c, d1=d1, d2=d2, A2=A2, G2=G2, b2=b2,
            lx=[0] * n1, ux=[bound] * n1, ly=[0] * n2, uy=[bound] * n2, name=f"den_like_{seed}",
        ))

    return _retry(build, rng)


def den2_like(n1=2, n2=2, m2=3, seed=0, bound=7, coef=50) -> MiblpInstance:
    """Pure integer, no leader rows, ``<=`` follower rows with mixed-sign
    coefficients of absolute value at most ``coef``."""
    rng = random.Random(seed)

    def build(rng):
        A2 = [[rng.randint(-coef, coef) for _ in range(n1)] for _ in range(m2)]
        G2 = [[rng.randint(-coef, coef) for _ in range(n2)] for _ in range(m2)]
        if not any(any(r) for r in A2):
            A2[0][0] = 1
        b2 = [rng.randint(-coef, coef * bound) for _ in range(m2)]
        c = [rng.randint(-coef, coef) for _ in range(n1)]
        d1 = [rng.randint(-coef, coef) for _ in range(n2)]
        d2 = [rng.randint(-coef, coef) for _ in range(n2)]
        return canonicalize(RawInstance(
            c=c, d1=d1, d2=d2, A2=A2, G2=G2, b2=b2, senses2=["<="] * m2,
            lx=[0] * n1, ux=[bound] * n1, ly=[0] * n2, uy=[bound] * n2, name=f"den2_like_{seed}",
        ))

    return _retry(build, rng)


def alignment(inst: MiblpInstance) -> float:
    """Cosine between the leader objective (c, d1) and the follower's (0, d2)."""
    a = np.concatenate([inst.c, inst.d1])
    b = np.concatenate([np.zeros(inst.n1), inst.d2])
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def zhang_like(n1=3, n2=3, m2=3, seed=0, bound=4, coef=10, rhs=(20, 30), align=(0.6, 0.8)) -> MiblpInstance:
    """Binary leader, general integer follower, no leader rows, ``<=`` follower
    rows with coefficients in [0, coef] and partially aligned objectives."""
    rng = random.Random(seed)

    def build(rng):
        d2 = [-rng.randint(1, coef) for _ in range(n2)]
        # leader objective: perturb the follower direction until the cosine fits
        for _ in range(500):
            c = [rng.randint(-coef, coef) for _ in range(n1)]
            d1 = [d + rng.randint(-coef, coef) for d in d2]
            a = np.array(c + d1, float)
            b = np.array([0] * n1 + d2, float)
            cosv = a @ b / (np.linalg.norm(a) * np.linalg.norm(b) or 1.0)
            if align[0] < cosv < align[1]:
                break
        else:
            return None
        A2 = [[rng.randint(0, coef) for _ in range(n1)] for _ in range(m2)]
        if not any(any(r) for r in A2):
            A2[0][0] = 1
        G2 = [[rng.randint(0, coef) for _ in range(n2)] for _ in range(m2)]
        b2 = [rng.randint(*rhs) for _ in range(m2)]
        return canonicalize(RawInstance(
            c=c, d1=d1, d2=d2, A2=A2, G2=G2, b2=b2, senses2=["<="] * m2,
            lx=[0] * n1, ux=[1] * n1, ly=[0] * n2, uy=[bound] * n2, name=f"zhang_like_{seed}",
        ))

    return _retry(build, rng)


def knapsack_interdiction(k=5, seed=0, coef=20) -> MiblpInstance:
    """Binary knapsack interdiction with k items, one budget row."""
    rng = random.Random(seed)

    def build(rng):
        w = [rng.randint(1, coef) for _ in range(k)]
        p = [rng.randint(1, coef) for _ in range(k)]
        cost = [rng.randint(1, coef) for _ in range(k)]
        cap = max(1, sum(w) // 2)
        budget = max(min(cost), sum(cost) // 3)
        return interdiction_instance(
            A=[[-v for v in cost]], b=[-budget], G=[[-v for v in w]], g=[-cap],
            d=p, u=[1] * k, name=f"knapsack_interdiction_{seed}",
        )

    return _retry(build, rng)


def xu_like(n1=2, n2=3, m2=3, seed=0, bound=5, coef=10) -> MiblpInstance:
    """Mixed integer follower (last follower variable continuous)."""
    rng = random.Random(seed)

    def build(rng):
        A2 = [[rng.randint(-coef, coef) for _ in range(n1)] for _ in range(m2)]
        G2 = [[rng.randint(-coef, coef) for _ in range(n2)] for _ in range(m2)]
        b2 = [rng.randint(-coef * bound, 0) for _ in range(m2)]
        yint = [True] * (n2 - 1) + [False]
        return canonicalize(RawInstance(
            c=[rng.randint(-coef, coef) for _ in range(n1)],
            d1=[rng.randint(-coef, coef) for _ in range(n2)],
            d2=[rng.randint(-coef, coef) for _ in range(n2)],
            A2=A2, G2=G2, b2=b2, lx=[0] * n1, ux=[bound] * n1, ly=[0] * n2, uy=[bound] * n2,
            y_integer=yint, name=f"xu_like_{seed}",
        ))

    return _retry(build, rng)


def generate(family, seed=0, **size) -> MiblpInstance:
    fn = {
        "den_like": den_like, "den2_like": den2_like, "zhang_like": zhang_like,
        "knapsack_interdiction": knapsack_interdiction, "xu_like": xu_like,
    }.get(family)
    if fn is None:
        raise ValueError(f"unknown family {family!r}")
    return fn(seed=seed, **size)
