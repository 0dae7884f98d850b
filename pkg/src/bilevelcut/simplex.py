"""Dense bounded-variable simplex over ``A z >= b, lo <= z <= up``."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

TOL = 1e-9
FEAS_TOL = 1e-7


@dataclass
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    up: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.lo = np.asarray(self.lo, dtype=float).ravel()
        self.up = np.asarray(self.up, dtype=float).ravel()
        if self.b.size != self.A.shape[0] or self.lo.size != n or self.up.size != n:
            raise ValueError("LpProblem dimensions are inconsistent")
        if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.up))):
            raise ValueError("LpProblem needs finite bounds")

    @property
    def n(self):
        return self.c.size

    @property
    def m(self):
        return self.A.shape[0]

    def with_bounds(self, lo, up):
        return LpProblem(self.c, self.A, self.b, lo, up)

    def add_rows(self, rows, rhs):
        rows = np.asarray(rows, dtype=float).reshape(-1, self.n)
        return LpProblem(self.c, np.vstack([self.A, rows]), np.concatenate([self.b, rhs]), self.lo, self.up)


@dataclass
class Basis:
    """Basic column per row plus status of every column (0 basic, 1 lower, 2 upper).

    Columns are the structurals followed by one surplus per row.
    """

    basic: np.ndarray
    state: np.ndarray


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None = None
    objective: float = np.inf
    basis: Basis | None = None
    iterations: int = 0
    problem: LpProblem | None = field(default=None, repr=False)
    _tableau: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self):
        return self.status == "optimal"

    def full_matrix(self):
        p = self.problem
        return np.hstack([p.A, -np.eye(p.m)])

    def tableau(self):
        """B^-1 [A | -I], recomputed from the basis."""
        if self._tableau is None:
            M = self.full_matrix()
            B = M[:, self.basis.basic]
            self._tableau = np.linalg.solve(B, M)
        return self._tableau

    def slacks(self):
        p = self.problem
        return p.A @ self.x - p.b


@dataclass
class ConeRays:
    vertex: np.ndarray
    rays: list
    binding_rows: np.ndarray
    binding_rhs: np.ndarray
    columns: list


def _bound_start(p):
    return np.where(p.c < 0, p.up, p.lo)


def _try_warm(p, M, warm):
    m, n = p.m, p.n
    basic = np.asarray(warm.basic, dtype=np.int64).copy()
    state = np.asarray(warm.state, dtype=np.int64).copy()
    if basic.size != m or state.size != n + m:
        return None
    B = M[:, basic]
    try:
        T = np.linalg.solve(B, M)
    except np.linalg.LinAlgError:
        return None
    lo = np.concatenate([p.lo, np.zeros(m)])
    up = np.concatenate([p.up, np.full(m, np.inf)])
    val = np.where(state == 2, up, lo)
    val[basic] = 0.0
    nb = state != 0
    rhs = p.b - M[:, nb] @ val[nb]
    val[basic] = np.linalg.solve(B, rhs)
    vb = val[basic]
    if np.any(vb < lo[basic] - FEAS_TOL) or np.any(vb > up[basic] + FEAS_TOL):
        return None
    val[basic] = np.clip(vb, lo[basic], up[basic])
    return T, val, basic, state, lo, up


def solve_lp(p: LpProblem, warm: Basis | None = None, max_iter=5000) -> LpResult:
    """Two-phase primal simplex. Returns an optimal vertex with its basis."""
    m, n = p.m, p.n
    if np.any(p.lo > p.up + FEAS_TOL):
        return LpResult("infeasible", problem=p)
    M = np.hstack([p.A, -np.eye(m)])
    total_iters = 0
    started = _try_warm(p, M, warm) if warm is not None else None
    if started is None:
        z0 = _bound_start(p)
        s0 = p.A @ z0 - p.b
        art_rows = np.flatnonzero(s0 < -FEAS_TOL)
        k = art_rows.size
        ncol = n + m + k
        Mf = np.zeros((m, ncol))
        Mf[:, : n + m] = M
        Mf[art_rows, n + m + np.arange(k)] = 1.0
        basic = n + np.arange(m, dtype=np.int64)
        basic[art_rows] = n + m + np.arange(k)
        T = -Mf
        T[art_rows] = Mf[art_rows]
        lo = np.concatenate([p.lo, np.zeros(m + k)])
        up = np.concatenate([p.up, np.full(m + k, np.inf)])
        state = np.concatenate([np.where(p.c < 0, 2, 1), np.ones(m + k)]).astype(np.int64)
        state[basic] = 0
        val = np.concatenate([z0, np.maximum(s0, 0.0), -s0[art_rows]])
        val[n + art_rows] = 0.0
        if k:
            cost1 = np.zeros(ncol)
            cost1[n + m:] = 1.0
            d = cost1 - T[art_rows].sum(axis=0)
            elig = np.ones(ncol, dtype=bool)
            st, it = _kernels.run_phase(T, d, val, basic, state, lo, up, elig, max_iter, TOL)
            total_iters += it
            if st == 1:
                return LpResult("limit", problem=p, iterations=total_iters)
            if val[n + m:].sum() > FEAS_TOL * max(1.0, np.abs(p.b).max(initial=0.0)):
                return LpResult("infeasible", problem=p, iterations=total_iters)
            dummy = np.zeros(ncol)
            for r in np.flatnonzero(basic >= n + m):
                row = np.abs(T[r, : n + m])
                q = int(np.argmax(row))
                if row[q] <= 1e-9:
                    return LpResult("error", problem=p, iterations=total_iters)
                state[basic[r]] = 1
                val[basic[r]] = 0.0
                basic[r] = q
                state[q] = 0
                _kernels.pivot(T, dummy, r, q)
            T = np.ascontiguousarray(T[:, : n + m])
            val = val[: n + m].copy()
            state = state[: n + m].copy()
            lo = lo[: n + m].copy()
            up = up[: n + m].copy()
    else:
        T, val, basic, state, lo, up = started
        T = np.ascontiguousarray(T)
    cost = np.concatenate([p.c, np.zeros(m)])
    d = cost - cost[basic] @ T
    elig = np.ones(n + m, dtype=bool)
    st, it = _kernels.run_phase(T, d, val, basic, state, lo, up, elig, max_iter, TOL)
    total_iters += it
    if st == 1:
        return LpResult("limit", problem=p, iterations=total_iters)
    if st == 2:
        return LpResult("error", problem=p, iterations=total_iters)
    # recompute values from the basis to shed accumulated pivot error
    B = M[:, basic]
    try:
        full = np.where(state == 2, up, lo).astype(float)
        full[basic] = 0.0
        nb = state != 0
        full[basic] = np.linalg.solve(B, p.b - M[:, nb] @ full[nb])
    except np.linalg.LinAlgError:
        full = val
    x = full[:n].copy()
    x = np.clip(x, p.lo, p.up)
    return LpResult("optimal", x=x, objective=float(p.c @ x),
                    basis=Basis(basic.copy(), state.copy()), iterations=total_iters, problem=p)


def extract_cone(p: LpProblem, r: LpResult) -> ConeRays:
    """One ray per nonbasic column of the optimal basis, in structural space."""
    if not r.optimal:
        raise ValueError("cone extraction needs an optimal basis")
    n, m = p.n, p.m
    T = r.tableau()
    basic = r.basis.basic
    state = r.basis.state
    rays, rows, rhs, cols = [], [], [], []
    struct_rows = basic < n
    for j in np.flatnonzero(state != 0):
        sgn = 1.0 if state[j] == 1 else -1.0
        if j < n and p.lo[j] == p.up[j]:
            # a fixed column sits at both bounds; take the side its reduced cost prices out
            red = p.c[j] - p.c[basic[struct_rows]] @ T[struct_rows, j]
            sgn = 1.0 if red >= 0 else -1.0
        ray = np.zeros(n)
        if j < n:
            ray[j] = sgn
        ray[basic[struct_rows]] -= sgn * T[struct_rows, j]
        nrm = np.abs(ray).max()
        if nrm > 0:
            ray /= nrm
        rays.append(ray)
        cols.append(int(j))
        if j < n:
            row = np.zeros(n)
            row[j] = sgn
            rows.append(row)
            rhs.append(p.lo[j] if sgn > 0 else -p.up[j])
        else:
            i = j - n
            rows.append(p.A[i].copy())
            rhs.append(p.b[i])
    return ConeRays(r.x.copy(), rays, np.array(rows).reshape(-1, n), np.array(rhs, dtype=float), cols)
