"""Exhaustive ground truth for small boxed instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .model import EPS, MiblpInstance, Point

DEFAULT_CAP = 10**6


class CapExceeded(ValueError):
    pass


@dataclass
class EnumerationResult:
    feasible_set: list
    optimum: tuple | None
    phi_table: dict = field(default_factory=dict)
    dim: int = 0

    @property
    def value(self):
        return math.inf if self.optimum is None else self.optimum[1]

    def points(self):
        if not self.feasible_set:
            return np.zeros((0, self.dim))
        return np.array([np.concatenate([p.x, p.y]) for p, _ in self.feasible_set])

    def values(self):
        return np.array([v for _, v in self.feasible_set])


def _ranges(lo, up):
    return [range(int(math.ceil(a - 1e-9)), int(math.floor(b + 1e-9)) + 1) for a, b in zip(lo, up)]


def lattice_size(inst: MiblpInstance) -> int:
    size = 1
    for r in _ranges(np.concatenate([inst.lx, inst.ly]), np.concatenate([inst.ux, inst.uy])):
        size *= max(len(r), 0)
    return size


def _require(inst, cap):
    if not inst.is_pure_integer():
        raise NotImplementedError("enumeration needs a pure integer instance")
    if lattice_size(inst) > cap:
        raise CapExceeded(f"lattice has {lattice_size(inst)} points, cap is {cap}")


def enumerate_direct(inst: MiblpInstance, cap=DEFAULT_CAP) -> EnumerationResult:
    """Plain double loop over the x and y lattices."""
    _require(inst, cap)
    ylat = [np.array(y, float) for y in itertools.product(*_ranges(inst.ly, inst.uy))]
    feas, table = [], {}
    for xt in itertools.product(*_ranges(inst.lx, inst.ux)):
        x = np.array(xt, float)
        rhs = inst.b2 - inst.A2 @ x
        foll = [y for y in ylat if np.all(inst.G2 @ y >= rhs - EPS)]
        phi = min((float(inst.d2 @ y) for y in foll), default=math.inf)
        table[tuple(int(v) for v in x[list(inst.L)])] = phi
        for y in foll:
            if inst.d2 @ y > phi + EPS:
                continue
            if inst.m1 and np.any(inst.A1 @ x + inst.G1 @ y < inst.b1 - EPS):
                continue
            feas.append((Point(x, y), inst.leader_value(x, y)))
    return _finish(feas, table, inst.n)


def enumerate_table(inst: MiblpInstance, cap=DEFAULT_CAP) -> EnumerationResult:
    """Vectorised path: value-function table over linking values, then one
    filtering pass per x."""
    _require(inst, cap)
    Y = np.array(list(itertools.product(*_ranges(inst.ly, inst.uy))), float).reshape(-1, inst.n2)
    X = np.array(list(itertools.product(*_ranges(inst.lx, inst.ux))), float).reshape(-1, inst.n1)
    GY = Y @ inst.G2.T
    dY = Y @ inst.d2
    L = list(inst.L)
    table = {}
    for xl in {tuple(int(v) for v in x[L]) for x in X}:
        xr = inst.lx.copy()
        xr[L] = xl
        ok = np.all(GY >= (inst.b2 - inst.A2 @ xr) - EPS, axis=1)
        table[xl] = float(dY[ok].min()) if ok.any() else math.inf
    feas = []
    for x in X:
        phi = table[tuple(int(v) for v in x[L])]
        if not math.isfinite(phi):
            continue
        ok = np.all(GY >= (inst.b2 - inst.A2 @ x) - EPS, axis=1) & (dY <= phi + EPS)
        if inst.m1:
            ok &= np.all(x @ inst.A1.T + Y @ inst.G1.T >= inst.b1 - EPS, axis=1)
        for y in Y[ok]:
            feas.append((Point(x.copy(), y.copy()), inst.leader_value(x, y)))
    return _finish(feas, table, inst.n)


def _finish(feas, table, dim):
    feas.sort(key=lambda t: tuple(np.concatenate([t[0].x, t[0].y])))
    opt = None
    for p, v in feas:
        if opt is None or v < opt[1] - 1e-9:
            opt = (p, v)
    return EnumerationResult(feas, opt, table, dim)


def enumerate(inst: MiblpInstance, cap=DEFAULT_CAP) -> EnumerationResult:  # noqa: A001
    return enumerate_table(inst, cap)


def enumerate_S(inst: MiblpInstance, cap=DEFAULT_CAP) -> np.ndarray:
    """All lattice points satisfying both levels' rows, as rows of (x, y)."""
    _require(inst, cap)
    Z = np.array(list(itertools.product(*_ranges(inst.lower(), inst.upper()))), float).reshape(-1, inst.n)
    M, rhs = inst.all_rows()
    return Z[np.all(Z @ M.T >= rhs - EPS, axis=1)]


def scope_points(inst, enum: EnumerationResult, cut):
    """Reference points a cut must not remove, as an array of (x, y) rows."""
    Z = enum.points()
    if Z.size == 0:
        return Z
    keep = np.ones(len(Z), dtype=bool)
    if cut.domain is not None:
        lo, up = cut.domain
        keep &= np.all((Z >= lo - EPS) & (Z <= up + EPS), axis=1)
    if cut.scope == "improving" and cut.incumbent is not None:
        keep &= enum.values() < cut.incumbent - EPS
    L = np.asarray(inst.L, dtype=np.int64)
    for g in cut.excluded:
        keep &= ~np.all(np.abs(Z[:, L] - np.asarray(g)) <= EPS, axis=1)
    return Z[keep]


def scope_violations(inst, enum: EnumerationResult, cut, tol=1e-6):
    """Points of the cut's reference set that violate it."""
    Z = scope_points(inst, enum, cut)
    if Z.size == 0:
        return Z
    lhs = Z @ cut.alpha - cut.beta
    scale = max(1.0, np.abs(cut.alpha).max())
    return Z[lhs < -tol * scale]
