"""Bilevel semantics: value function, optimistic reaction, feasibility
classification, certificates and the fixed-linking upper bound problem."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .milp import MilpProblem, solve_milp
from .model import EPS, MiblpInstance, Point
from .simplex import LpProblem

C1 = "violates_C1"
C2A = "violates_2a"
C2B = "violates_2b"
C2C = "violates_2c"
NOT_IN_P2 = "violates_P2"


@dataclass
class Certificate:
    kind: str  # improving_solution | improving_direction
    y: np.ndarray | None = None
    dy: np.ndarray | None = None
    drop_rows: np.ndarray | None = None
    drop_lower: np.ndarray | None = None
    drop_upper: np.ndarray | None = None


@dataclass
class FeasibilityVerdict:
    flags: set = field(default_factory=set)
    phi_value: float | None = None
    certificate: Certificate | None = None
    reaction: np.ndarray | None = None

    @property
    def feasible(self):
        return not self.flags

    @property
    def klass(self):
        if not self.flags:
            return "bilevel_feasible"
        for f in (C1, C2A, C2B, NOT_IN_P2, C2C):
            if f in self.flags:
                return f
        return next(iter(self.flags))


def _is_int(v, tol=EPS):
    return bool(np.all(np.abs(v - np.round(v)) <= tol))


class BilevelOracle:
    """Caching wrapper around the MILP subproblems of one instance.

    ``calls`` counts actual (uncached) subproblem solves by kind.
    """

    def __init__(self, inst: MiblpInstance, eps=EPS):
        self.inst = inst
        self.eps = eps
        self.calls = Counter()
        self._phi = {}
        self._react = {}
        self._ub = {}
        self._maxd2 = None
        self._maxd2_excl = {}
        self.events = []

    # second level -----------------------------------------------------
    def follower_rhs(self, x):
        return self.inst.b2 - self.inst.A2 @ np.asarray(x, float)

    def _key(self, rhs):
        return tuple(np.round(rhs, 9))

    def phi_rhs(self, rhs):
        """(value, argmin) of the follower for right-hand side ``rhs``."""
        key = self._key(rhs)
        hit = self._phi.get(key)
        if hit is not None:
            return hit
        inst = self.inst
        self.calls["second_level"] += 1
        lp = LpProblem(inst.d2, inst.G2, rhs, inst.ly, inst.uy)
        r = solve_milp(MilpProblem(lp, np.arange(inst.r2)))
        if r.status == "optimal":
            out = (r.objective, r.x)
        elif r.status == "infeasible":
            out = (math.inf, None)
        else:
            raise RuntimeError(f"follower oracle stopped with status {r.status}")
        self._phi[key] = out
        return out

    def phi(self, x):
        return self.phi_rhs(self.follower_rhs(x))[0]

    def reaction(self, x):
        """Optimistic reaction: best leader value among follower optima."""
        x = np.asarray(x, float)
        inst = self.inst
        rhs2 = self.follower_rhs(x)
        key = (self._key(rhs2), self._key(inst.b1 - inst.A1 @ x))
        if key in self._react:
            return self._react[key]
        val, _ = self.phi_rhs(rhs2)
        if not math.isfinite(val):
            self._react[key] = None
            return None
        self.calls["reaction"] += 1
        A = np.vstack([inst.G2, inst.G1, -inst.d2[None, :]])
        b = np.concatenate([rhs2, inst.b1 - inst.A1 @ x, [-(val + self.eps)]])
        r = solve_milp(MilpProblem(LpProblem(inst.d1, A, b, inst.ly, inst.uy), np.arange(inst.r2)))
        y = r.x if r.status == "optimal" else None
        self._react[key] = y
        return y

    # feasibility ------------------------------------------------------
    def check_feasibility(self, p: Point, certificate=True) -> FeasibilityVerdict:
        inst = self.inst
        x, y = p.x, p.y
        v = FeasibilityVerdict()
        tol = self.eps
        if not _is_int(x[: inst.r1]) or np.any(x < inst.lx - tol) or np.any(x > inst.ux + tol):
            v.flags.add(C1)
        if inst.m1 and np.any(inst.A1 @ x + inst.G1 @ y < inst.b1 - tol):
            v.flags.add(C2A)
        if not _is_int(y[: inst.r2]):
            v.flags.add(C2B)
        if (np.any(inst.A2 @ x + inst.G2 @ y < inst.b2 - tol)
                or np.any(y < inst.ly - tol) or np.any(y > inst.uy + tol)):
            v.flags.add(NOT_IN_P2)
        val, yopt = self.phi_rhs(self.follower_rhs(x))
        v.phi_value = val
        if not math.isfinite(val):
            # no follower response exists: x has no reaction
            v.flags.add(C2C)
            return v
        if inst.d2 @ y > val + tol:
            v.flags.add(C2C)
            if certificate:
                ystar = yopt
                if C1 not in v.flags:
                    r = self.reaction(x)
                    if r is not None:
                        ystar = r
                        v.reaction = r
                v.certificate = Certificate("improving_solution", y=ystar)
        return v

    def classify(self, p: Point) -> str:
        inst = self.inst
        integral = _is_int(p.x[: inst.r1]) and _is_int(p.y[: inst.r2])
        val = self.phi(p.x)
        improvable = math.isfinite(val) and inst.d2 @ p.y > val + self.eps
        if integral:
            if improvable or not math.isfinite(val):
                return "C3"
            return "feasible"
        return "C2" if improvable else "C1"

    # fixed linking ----------------------------------------------------
    def best_ub(self, gamma):
        """Best bilevel feasible point with x_L = gamma, or None."""
        inst = self.inst
        gamma = np.round(np.asarray(gamma, float))
        key = tuple(gamma)
        if key in self._ub:
            return self._ub[key]
        self.events.append(("ub", key))
        L = inst.L_arr
        xr = inst.lx.copy()
        xr[L] = gamma
        val = self.phi(xr)
        if not math.isfinite(val):
            self._ub[key] = None
            return None
        self.calls["ub"] += 1
        lo, up = inst.lower(), inst.upper()
        lo[L] = gamma
        up[L] = gamma
        M, rhs = inst.all_rows()
        row = np.concatenate([np.zeros(inst.n1), -inst.d2])
        A = np.vstack([M, row[None, :]])
        b = np.concatenate([rhs, [-(val + self.eps)]])
        c = np.concatenate([inst.c, inst.d1])
        ints = np.flatnonzero(inst.integer_mask())
        r = solve_milp(MilpProblem(LpProblem(c, A, b, lo, up), ints))
        out = None
        if r.status == "optimal":
            out = (Point.from_z(inst, r.x), r.objective)
        self._ub[key] = out
        return out

    def ub_solved(self, gamma):
        return tuple(np.round(np.asarray(gamma, float))) in self._ub

    # certificates ------------------------------------------------------
    def find_improving_direction(self, p: Point) -> Certificate | None:
        inst = self.inst
        n2, m2 = inst.n2, inst.m2
        if not np.any(inst.d2):
            return None
        self.calls["idic"] += 1
        yh = p.y
        lo_d = inst.ly - yh
        up_d = inst.uy - yh
        ri = np.arange(inst.r2)
        lo_d[ri] = np.ceil(lo_d[ri] - 1e-9)
        up_d[ri] = np.floor(up_d[ri] + 1e-9)
        if np.any(lo_d > up_d):
            return None
        G = inst.G2
        wlo = np.minimum(G * lo_d, G * up_d).sum(axis=1)
        wlo = np.minimum(wlo, 0.0)
        vlo = np.minimum(lo_d, 0.0)
        tlo = np.minimum(-up_d, 0.0)
        nv = n2 + m2 + 2 * n2
        c = np.zeros(nv)
        c[n2:] = -1.0
        I = np.eye(n2)
        Z = lambda r, k: np.zeros((r, k))
        rows = [
            np.hstack([-inst.d2[None, :], Z(1, m2 + 2 * n2)]),
            np.hstack([G, Z(m2, m2 + 2 * n2)]),
            np.hstack([G, -np.eye(m2), Z(m2, 2 * n2)]),
            np.hstack([I, Z(n2, m2), -I, Z(n2, n2)]),
            np.hstack([-I, Z(n2, m2 + n2), -I]),
        ]
        rhs = np.concatenate([[1.0], inst.b2 - inst.A2 @ p.x - G @ yh, np.zeros(m2 + 2 * n2)])
        lo = np.concatenate([lo_d, wlo, vlo, tlo])
        up = np.concatenate([up_d, np.zeros(m2 + 2 * n2)])
        r = solve_milp(MilpProblem(LpProblem(c, np.vstack(rows), rhs, lo, up), ri))
        if r.status != "optimal":
            return None
        z = r.x
        dy = z[:n2]
        w = z[n2 : n2 + m2]
        v = z[n2 + m2 : 2 * n2 + m2]
        t = z[2 * n2 + m2 :]
        tol = self.eps
        return Certificate(
            "improving_direction", dy=dy,
            drop_rows=np.abs(w) <= tol, drop_lower=np.abs(v) <= tol, drop_upper=np.abs(t) <= tol,
        )

    def type2_solution(self, p: Point):
        """Improving solution chosen to keep as few follower rows as possible.

        Returns (y*, keep_rows) or None.
        """
        inst = self.inst
        n2, m2 = inst.n2, inst.m2
        self.calls["type2"] += 1
        A2 = inst.A2
        Lvec = np.minimum(A2 * inst.lx, A2 * inst.ux).sum(axis=1)
        k = math.ceil(float(inst.d2 @ p.y) - 1 - 1e-6)
        coef = A2 @ p.x - Lvec
        A = np.vstack([
            np.concatenate([-inst.d2, np.zeros(m2)])[None, :],
            np.hstack([inst.G2, np.diag(coef)]),
        ])
        b = np.concatenate([[-k], inst.b2 - Lvec])
        c = np.concatenate([np.zeros(n2), np.ones(m2)])
        lo = np.concatenate([inst.ly, np.zeros(m2)])
        up = np.concatenate([inst.uy, np.ones(m2)])
        ints = np.concatenate([np.arange(inst.r2), n2 + np.arange(m2)])
        r = solve_milp(MilpProblem(LpProblem(c, A, b, lo, up), ints))
        if r.status != "optimal":
            return None
        ystar = r.x[:n2]
        keep = np.round(r.x[n2:]) > 0.5
        return ystar, keep

    # big-M --------------------------------------------------------------
    def _max_d2_over_S(self, exclude=()):
        inst = self.inst
        key = tuple(sorted(int(i) for i in exclude))
        cache = self._maxd2_excl
        if key in cache:
            return cache[key]
        self.calls["big_m"] += 1
        obj = -inst.d2.copy()
        obj[list(key)] = 0.0
        M, rhs = inst.all_rows()
        c = np.concatenate([np.zeros(inst.n1), obj])
        ints = np.flatnonzero(inst.integer_mask())
        r = solve_milp(MilpProblem(LpProblem(c, M, rhs, inst.lower(), inst.upper()), ints))
        val = -r.objective if r.status == "optimal" else 0.0
        cache[key] = val
        return val

    def big_m(self, ystar):
        return max(0.0, self._max_d2_over_S() - float(self.inst.d2 @ ystar))

    def big_m_interdiction(self, ystar, Lplus, Lminus):
        inst = self.inst
        J = [i for i in Lplus if abs(ystar[i]) <= self.eps]
        base = self._max_d2_over_S(exclude=J)
        extra = sum(max(0.0, inst.d2[i] * ystar[i]) for i in Lminus)
        return max(0.0, base + extra - float(inst.d2 @ ystar))


# module-level conveniences --------------------------------------------------

def phi(inst, x, oracle=None):
    return (oracle or BilevelOracle(inst)).phi(x)


def reaction(inst, x, oracle=None):
    return (oracle or BilevelOracle(inst)).reaction(x)


def check_feasibility(inst, p, oracle=None, certificate=True):
    return (oracle or BilevelOracle(inst)).check_feasibility(p, certificate)


def classify_relaxation_solution(inst, p, oracle=None):
    return (oracle or BilevelOracle(inst)).classify(p)


def best_ub(inst, gamma, oracle=None):
    return (oracle or BilevelOracle(inst)).best_ub(gamma)


def find_improving_direction(inst, p, oracle=None):
    return (oracle or BilevelOracle(inst)).find_improving_direction(p)


def compute_big_m(inst, ystar, oracle=None):
    return (oracle or BilevelOracle(inst)).big_m(np.asarray(ystar, float))
