"""Cut generators and the intersection-cut engine.

All cuts are ``alpha . (x, y) >= beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .bilevel import BilevelOracle, Certificate
from .model import EPS, MiblpInstance, Point, follower_data_integral, objective2_integral
from .simplex import LpResult, extract_cone

INTERIOR_TOL = 1e-7
PARALLEL_TOL = 1e-9  # slack decrease per unit ray below this (relative) means parallel

# failure reasons
NO_CERTIFICATE = "no_certificate"
CONE_CONTAINED = "cone_contained"
NOT_APPLICABLE = "not_applicable"
NUMERICS = "numerics"

GLOBAL = "global"
IMPROVING = "improving"
LINKING_EXCLUDING = "linking_excluding"


@dataclass
class Cut:
    alpha_x: np.ndarray
    alpha_y: np.ndarray
    beta: float
    scope: str = GLOBAL
    origin: str = ""
    gamma: tuple | None = None
    domain: tuple | None = None  # (lo, up) box the cut is valid within
    excluded: tuple = ()  # linking values whose points may be removed
    incumbent: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def alpha(self):
        return np.concatenate([self.alpha_x, self.alpha_y])

    def lhs(self, z):
        return float(self.alpha @ np.asarray(z, float))

    def violation(self, z):
        return self.beta - self.lhs(z)

    def satisfied(self, z, tol=EPS):
        return self.violation(z) <= tol * max(1.0, np.abs(self.alpha).max())


@dataclass
class CutFailure:
    reason: str
    detail: str = ""

    def __bool__(self):
        return False


@dataclass
class BfsSet:
    H: np.ndarray
    h: np.ndarray

    def slack(self, z):
        return self.H @ z - self.h


def normalize(alpha, beta, n1):
    """Scale to unit infinity norm; if the data are rational with small
    denominators, rescale to coprime integers instead."""
    scale = np.abs(alpha).max()
    if scale <= 0:
        return None
    a = alpha / scale
    b = beta / scale
    fr = [Fraction(float(v)).limit_denominator(1000) for v in np.append(a, b)]
    if all(abs(float(f) - v) <= 1e-9 for f, v in zip(fr, np.append(a, b))):
        lcm = reduce(lambda p, q: p * q // math.gcd(p, q), (f.denominator for f in fr), 1)
        ints = [int(f * lcm) for f in fr]
        g = reduce(math.gcd, (abs(v) for v in ints[:-1] if v), 0) or 1
        g = math.gcd(g, abs(ints[-1])) if ints[-1] else g
        a = np.array(ints[:-1], float) / g
        b = ints[-1] / g
    return a[:n1], a[n1:], float(b)


def make_cut(inst, alpha, beta, origin, scope=GLOBAL, **kw):
    out = normalize(np.asarray(alpha, float), float(beta), inst.n1)
    if out is None:
        return CutFailure(NUMERICS, "zero cut")
    ax, ay, b = out
    return Cut(ax, ay, b, scope=scope, origin=origin, **kw)


def _vertex(lp: LpResult):
    return lp.x


def _point(inst, lp):
    return Point.from_z(inst, lp.x)


def _is_int(v, tol=EPS):
    return bool(np.all(np.abs(v - np.round(v)) <= tol))


# intersection cuts ----------------------------------------------------------

def intersection_cut(cone, bfs: BfsSet, inst=None, origin="ic"):
    """Intersection cut from a simplicial cone and a convex set containing the
    cone vertex in its interior."""
    v = cone.vertex
    if bfs.H.shape[0] and np.any(bfs.slack(v) <= INTERIOR_TOL):
        return CutFailure(NO_CERTIFICATE, "vertex not interior")
    R = np.array(cone.rays).T  # columns are rays
    n = v.size
    if R.shape != (n, n):
        return CutFailure(NUMERICS, "cone is not simplicial")
    sl = bfs.slack(v)
    HR = bfs.H @ R if bfs.H.shape[0] else np.zeros((0, n))
    lam = np.full(n, np.inf)
    hnorm = np.maximum(1.0, np.abs(bfs.H).max(axis=1)) if bfs.H.shape[0] else np.zeros(0)
    for j in range(n):
        # rays carry ~1e-13 noise from B^-1; without a relative threshold that
        # noise reads as a crossing at lambda ~ 1e13
        dec = HR[:, j] < -PARALLEL_TOL * hnorm
        if dec.any():
            lam[j] = float(np.min(sl[dec] / -HR[dec, j]))
    if np.all(np.isinf(lam)):
        return CutFailure(CONE_CONTAINED)
    inv = np.where(np.isinf(lam), 0.0, 1.0 / lam)
    try:
        alpha = np.linalg.solve(R.T, inv)
    except np.linalg.LinAlgError:
        return CutFailure(NUMERICS, "singular ray matrix")
    beta = 1.0 + alpha @ v
    points = [v + lam[j] * R[:, j] for j in range(n) if np.isfinite(lam[j])]
    meta = {"points": points, "interior": float(sl.min()) if sl.size else math.inf, "lambda": lam}
    if inst is None:
        return Cut(alpha[:0], alpha, beta, origin=origin, meta=meta)
    c = make_cut(inst, alpha, beta, origin, meta=meta)
    return c


def _drop_zero_rows(H, h):
    keep = np.any(np.abs(H) > 1e-12, axis=1)
    return H[keep], h[keep], bool(np.all(h[~keep] < 0))


def bfs_improving_solution(inst: MiblpInstance, ystar, keep_rows=None) -> BfsSet:
    ystar = np.asarray(ystar, float)
    rows = [np.concatenate([np.zeros(inst.n1), inst.d2])[None, :]]
    rhs = [np.array([inst.d2 @ ystar])]
    A2 = inst.A2
    r2 = inst.b2 - inst.G2 @ ystar - 1.0
    if keep_rows is not None:
        A2 = A2[keep_rows]
        r2 = r2[keep_rows]
    rows.append(np.hstack([A2, np.zeros((A2.shape[0], inst.n2))]))
    rhs.append(r2)
    H = np.vstack(rows)
    h = np.concatenate(rhs)
    H, h, _ = _drop_zero_rows(H, h)
    return BfsSet(H, h)


def bfs_improving_direction(inst: MiblpInstance, cert: Certificate) -> BfsSet:
    dy = np.asarray(cert.dy, float)
    n1, n2 = inst.n1, inst.n2
    keep = ~np.asarray(cert.drop_rows if cert.drop_rows is not None else np.zeros(inst.m2, bool))
    lo_keep = ~np.asarray(cert.drop_lower if cert.drop_lower is not None else np.zeros(n2, bool))
    up_keep = ~np.asarray(cert.drop_upper if cert.drop_upper is not None else np.zeros(n2, bool))
    I = np.eye(n2)
    H = np.vstack([
        np.hstack([inst.A2, inst.G2])[keep],
        np.hstack([np.zeros((n2, n1)), I])[lo_keep],
        np.hstack([np.zeros((n2, n1)), -I])[up_keep],
    ])
    h = np.concatenate([
        (inst.b2 - inst.G2 @ dy - 1.0)[keep],
        (inst.ly - 1.0 - dy)[lo_keep],
        (-inst.uy - 1.0 + dy)[up_keep],
    ])
    H, h, _ = _drop_zero_rows(H, h)
    return BfsSet(H, h)


def bfs_hypercube(inst: MiblpInstance, xhat) -> BfsSet:
    rows, rhs = [], []
    for i in inst.L:
        e = np.zeros(inst.n)
        e[i] = 1.0
        rows += [e, -e]
        rhs += [xhat[i] - 1.0, -xhat[i] - 1.0]
    return BfsSet(np.array(rows).reshape(-1, inst.n), np.array(rhs, float))


def _ic_applicable(inst):
    return follower_data_integral(inst)


def gen_isic_type1(inst, lp: LpResult, ystar=None):
    if not _ic_applicable(inst):
        return CutFailure(NOT_APPLICABLE, "follower data not integral")
    if ystar is None:
        return CutFailure(NO_CERTIFICATE)
    ystar = np.asarray(ystar, float)
    if inst.d2 @ lp.x[inst.n1 :] <= inst.d2 @ ystar + EPS:
        return CutFailure(NO_CERTIFICATE, "y* does not improve")
    cone = extract_cone(lp.problem, lp)
    return intersection_cut(cone, bfs_improving_solution(inst, ystar), inst, "isic1")


def gen_isic_type2(inst, lp: LpResult, oracle: BilevelOracle | None = None):
    if not (_ic_applicable(inst) and objective2_integral(inst)):
        return CutFailure(NOT_APPLICABLE, "follower data not integral")
    oracle = oracle or BilevelOracle(inst)
    sol = oracle.type2_solution(_point(inst, lp))
    if sol is None:
        return CutFailure(NO_CERTIFICATE)
    ystar, keep = sol
    cone = extract_cone(lp.problem, lp)
    cut = intersection_cut(cone, bfs_improving_solution(inst, ystar, keep), inst, "isic2")
    if cut:
        cut.meta["ystar"] = ystar
    return cut


def gen_idic(inst, lp: LpResult, oracle: BilevelOracle | None = None, cert=None):
    if not (_ic_applicable(inst) and objective2_integral(inst)):
        return CutFailure(NOT_APPLICABLE, "follower data not integral")
    oracle = oracle or BilevelOracle(inst)
    if cert is None:
        cert = oracle.find_improving_direction(_point(inst, lp))
    if cert is None:
        return CutFailure(NO_CERTIFICATE)
    cone = extract_cone(lp.problem, lp)
    cut = intersection_cut(cone, bfs_improving_direction(inst, cert), inst, "idic")
    if cut:
        cut.meta["dy"] = cert.dy
    return cut


def gen_hypercube_ic(inst, lp: LpResult, ub_solved: bool):
    xhat = lp.x[: inst.n1]
    L = list(inst.L)
    if not L or not _is_int(xhat[L]):
        return CutFailure(NOT_APPLICABLE, "linking part not integral")
    if not ub_solved:
        raise RuntimeError("the fixed-linking problem must be solved before a hypercube cut")
    cone = extract_cone(lp.problem, lp)
    gamma = tuple(int(v) for v in np.round(xhat[L]))
    cut = intersection_cut(cone, bfs_hypercube(inst, xhat), inst, "hypercube")
    if cut:
        cut.scope = LINKING_EXCLUDING
        cut.gamma = gamma
    return cut


# no-good and Benders cuts ---------------------------------------------------

def _integer_sum(rows, rhs, weights):
    a = np.asarray(weights, float) @ rows
    b = float(np.asarray(weights, float) @ rhs)
    if not (_is_int(a, 1e-9) and abs(b - round(b)) <= 1e-9):
        return None
    ai = [int(round(v)) for v in a]
    bi = int(round(b))
    g = reduce(math.gcd, (abs(v) for v in ai if v), 0)
    if g == 0:
        return None
    return [v // g for v in ai], bi / g


def gen_integer_no_good(inst, lp: LpResult, weights=None):
    """Sum of the binding rows at an integral vertex, shifted by one."""
    z = lp.x
    if not inst.is_pure_integer() or not _is_int(z):
        return CutFailure(NOT_APPLICABLE, "vertex or instance not integral")
    cone = extract_cone(lp.problem, lp)
    rows, rhs = cone.binding_rows, cone.binding_rhs
    w = np.ones(len(rhs)) if weights is None else np.asarray(weights, float)
    if w.size != len(rhs) or np.any(w <= 0):
        return CutFailure(NOT_APPLICABLE, "weights must be positive, one per binding row")
    out = _integer_sum(rows, rhs, w)
    if out is None:
        return CutFailure(NOT_APPLICABLE, "binding rows not integral")
    a, _ = out
    zi = np.round(z).astype(np.int64)
    beta = int(np.dot(a, zi)) + 1
    return Cut(np.array(a[: inst.n1], float), np.array(a[inst.n1 :], float), float(beta), origin="integer_no_good")


def binding_rows_for(cone, order):
    """Reorder binding rows of a cone; helper for the weighted variant."""
    return cone.binding_rows[order], cone.binding_rhs[order]


def _binary_linking(inst):
    L = list(inst.L)
    return bool(L) and np.all(inst.lx[L] >= 0) and np.all(inst.ux[L] <= 1)


def gen_benders_binary(inst, lp: LpResult, ystar, M):
    if not _binary_linking(inst):
        return CutFailure(NOT_APPLICABLE, "linking variables not binary")
    xhat = lp.x[: inst.n1]
    L = list(inst.L)
    if not _is_int(xhat[L]):
        return CutFailure(NOT_APPLICABLE, "linking part not integral")
    if ystar is None:
        return CutFailure(NO_CERTIFICATE)
    ystar = np.asarray(ystar, float)
    ay = -inst.d2.copy()
    ax = np.zeros(inst.n1)
    beta = -float(inst.d2 @ ystar)
    for i in L:
        col = inst.A2[:, i]
        in_minus = np.all(col <= 0)
        in_plus = np.all(col >= 0)
        if round(xhat[i]) == 1 and not in_minus:
            # + M (1 - x_i)
            ax[i] -= M
            beta -= M
        elif round(xhat[i]) == 0 and not in_plus:
            ax[i] += M
    return make_cut(inst, np.concatenate([ax, ay]), beta, "benders_binary", meta={"M": M})


def interdiction_sign_sets(inst):
    G = inst.interdiction.G
    Lp = [i for i in inst.L if np.all(G[:, i] >= 0)]
    Lm = [i for i in inst.L if np.all(G[:, i] <= 0)]
    return Lp, Lm


def gen_benders_interdiction(inst, lp: LpResult, ystar, M):
    if inst.interdiction is None:
        return CutFailure(NOT_APPLICABLE, "not an interdiction instance")
    xhat = lp.x[: inst.n1]
    L = list(inst.L)
    if not _is_int(xhat[L]):
        return CutFailure(NOT_APPLICABLE, "linking part not integral")
    if ystar is None:
        return CutFailure(NO_CERTIFICATE)
    ystar = np.asarray(ystar, float)
    d2 = inst.d2
    Lp, Lm = interdiction_sign_sets(inst)
    # d2 y + sum_{L-} d2_i y*_i x_i - sum_{L+, y*_i=0} d2_i y_i - M sum_{L\L-, y*_i>0} x_i <= d2 y*
    ax = np.zeros(inst.n1)
    ay = d2.copy()
    for i in Lm:
        ax[i] += d2[i] * ystar[i]
    for i in Lp:
        if abs(ystar[i]) <= EPS:
            ay[i] -= d2[i]
    for i in L:
        if i not in Lm and ystar[i] > EPS:
            ax[i] -= M
    return make_cut(inst, -np.concatenate([ax, ay]), -float(d2 @ ystar), "benders_interdiction", meta={"M": M})


def gen_generalized_no_good(inst, gamma, ub_solved: bool):
    if not _binary_linking(inst):
        return CutFailure(NOT_APPLICABLE, "linking variables not binary")
    if not ub_solved:
        raise RuntimeError("the fixed-linking problem must be solved before a no-good cut")
    gamma = np.round(np.asarray(gamma, float))
    ax = np.zeros(inst.n1)
    beta = 1.0
    for i, g in zip(inst.L, gamma):
        if g == 0:
            ax[i] = 1.0
        else:
            ax[i] = -1.0
            beta -= 1.0
    return Cut(ax, np.zeros(inst.n2), beta, scope=LINKING_EXCLUDING, origin="generalized_no_good",
               gamma=tuple(int(g) for g in gamma))


# integrality cuts -----------------------------------------------------------

def simple_integrality_cuts(inst, lp: LpResult, max_cuts=5):
    """Gomory fractional cuts from tableau rows of fractional integer basics.

    A row is used only if every nonbasic column with a nonzero entry is an
    integer variable or the surplus of an all-integer row.
    """
    p = lp.problem
    n, m = p.n, p.m
    mask = inst.integer_mask()
    z = lp.x
    if not np.any(np.abs(z[mask] - np.round(z[mask])) > EPS):
        return []
    row_int = np.array([
        _is_int(p.A[i], 1e-9) and abs(p.b[i] - round(p.b[i])) <= 1e-9 and not np.any(p.A[i][~mask] != 0)
        for i in range(m)
    ], dtype=bool)
    col_int = np.concatenate([mask, row_int])
    T = lp.tableau()
    basic = lp.basis.basic
    state = lp.basis.state
    nonbasic = np.flatnonzero(state != 0)
    sign = np.where(state[nonbasic] == 1, 1.0, -1.0)
    cands = []
    for r, j in enumerate(basic):
        if j >= n or not mask[j]:
            continue
        f0 = z[j] - math.floor(z[j])
        if f0 < 1e-4 or f0 > 1 - 1e-4:
            continue
        a = T[r, nonbasic] * sign
        nz = np.abs(a) > 1e-9
        if not np.all(col_int[nonbasic[nz]]):
            continue
        cands.append((-min(f0, 1 - f0), r, j, f0, a))
    cands.sort(key=lambda t: (t[0], t[2]))
    cuts = []
    for _, r, j, f0, a in cands[:max_cuts]:
        fa = a - np.floor(a)
        fa[np.abs(fa) < 1e-9] = 0.0
        fa[np.abs(fa - 1) < 1e-9] = 0.0
        # sum fa_k t_k >= f0, with t_k expressed in z
        alpha = np.zeros(n)
        beta = f0
        for k, col in enumerate(nonbasic):
            if fa[k] == 0:
                continue
            up_side = state[col] == 2
            if col < n:
                if up_side:
                    alpha[col] -= fa[k]
                    beta -= fa[k] * p.up[col]
                else:
                    alpha[col] += fa[k]
                    beta += fa[k] * p.lo[col]
            else:
                i = col - n
                alpha += fa[k] * p.A[i]
                beta += fa[k] * p.b[i]
        c = make_cut(inst, alpha, beta, "gomory")
        if c and c.violation(z) >= EPS:
            cuts.append(c)
    return cuts
