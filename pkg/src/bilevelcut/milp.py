"""Small branch-and-bound MILP solver used as the subproblem oracle."""

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .simplex import LpProblem, solve_lp

INT_TOL = 1e-6


@dataclass
class MilpProblem:
    lp: LpProblem
    integer: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    cutoff: float | None = None

    def __post_init__(self):
        self.integer = np.asarray(self.integer, dtype=np.int64).ravel()
        if self.integer.size and (self.integer.min() < 0 or self.integer.max() >= self.lp.n):
            raise ValueError("integer index out of range")


@dataclass
class MilpResult:
    status: str  # optimal, infeasible, cutoff_exceeded, limit
    x: np.ndarray | None = None
    objective: float = math.inf
    nodes: int = 0

    @property
    def found(self):
        return self.x is not None


def _integral_objective(p: MilpProblem):
    c = p.lp.c
    mask = np.zeros(c.size, dtype=bool)
    mask[p.integer] = True
    if np.any(c[~mask] != 0):
        return False
    return bool(np.all(np.abs(c[mask] - np.round(c[mask])) <= 1e-12))


def solve_milp(p: MilpProblem, node_limit=200_000, eps=1e-6) -> MilpResult:
    """Depth-first branch and bound, most-fractional branching.

    With a cutoff k only solutions of value <= k - eps are accepted; when none
    exist the status is ``cutoff_exceeded``, an empty feasible set included.
    """
    lp = p.lp
    lo0 = lp.lo.copy()
    up0 = lp.up.copy()
    idx = p.integer
    lo0[idx] = np.ceil(lo0[idx] - INT_TOL)
    up0[idx] = np.floor(up0[idx] + INT_TOL)
    step = 1.0 if _integral_objective(p) else 0.0
    best_x, best_val = None, math.inf
    limit = math.inf if p.cutoff is None else p.cutoff - eps
    counter = 0
    heap = [(0, -math.inf, counter, lo0, up0)]
    nodes = 0

    def threshold():
        t = limit
        if best_x is not None:
            t = min(t, best_val - (step - 1e-6 if step else 1e-9))
        return t

    while heap:
        negdepth, bound, _, lo, up = heapq.heappop(heap)
        if bound > threshold():
            continue
        if nodes >= node_limit:
            return MilpResult("limit", best_x, best_val, nodes)
        nodes += 1
        if np.any(lo > up + 1e-9):
            continue
        r = solve_lp(lp.with_bounds(lo, up))
        if r.status == "infeasible":
            continue
        if not r.optimal:
            return MilpResult("limit", best_x, best_val, nodes)
        obj = r.objective
        if obj > threshold():
            continue
        xi = r.x[idx]
        frac = np.abs(xi - np.round(xi))
        if idx.size == 0 or frac.max() <= INT_TOL:
            x = r.x.copy()
            x[idx] = np.round(x[idx])
            if idx.size < lp.n:
                # re-optimise the continuous part at the rounded values
                fl, fu = lo.copy(), up.copy()
                fl[idx] = x[idx]
                fu[idx] = x[idx]
                rr = solve_lp(lp.with_bounds(fl, fu))
                if not rr.optimal:
                    continue
                x = rr.x.copy()
                x[idx] = np.round(x[idx])
            val = float(lp.c @ x)
            if val <= limit and (best_x is None or val < best_val - 1e-12):
                best_x, best_val = x, val
            continue
        k = int(np.argmax(frac))
        j = int(idx[k])
        v = r.x[j]
        dl, du = lo.copy(), up.copy()
        du[j] = math.floor(v)
        ul, uu = lo.copy(), up.copy()
        ul[j] = math.ceil(v)
        for clo, cup in ((dl, du), (ul, uu)):
            counter += 1
            heapq.heappush(heap, (negdepth - 1, obj, counter, clo, cup))
    if best_x is not None:
        return MilpResult("optimal", best_x, best_val, nodes)
    if p.cutoff is not None:
        return MilpResult("cutoff_exceeded", None, math.inf, nodes)
    return MilpResult("infeasible", None, math.inf, nodes)
