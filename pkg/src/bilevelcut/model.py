"""Canonical MIBLP data model.

Everything downstream assumes the canonical form::

    min  c x + d1 y
    s.t. A1 x + G1 y >= b1
         lx <= x <= ux,  x_i integer for i < r1
         y in argmin { d2 y : A2 x + G2 y >= b2, ly <= y <= uy, y_i integer for i < r2 }

Box bounds on ``y`` belong to the follower problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

EPS = 1e-6


class ModelError(ValueError):
    pass


def _vec(v, n, name):
    a = np.asarray(v if v is not None else np.zeros(n), dtype=float).ravel()
    if a.size != n:
        raise ModelError(f"{name}: expected length {n}, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ModelError(f"{name}: entries must be finite")
    return a


def _mat(M, m, n, name):
    if M is None:
        return np.zeros((m, n))
    a = np.asarray(M, dtype=float)
    if a.size == 0:
        a = a.reshape(m, n) if m * n == 0 else a
    a = a.reshape(m, n) if a.ndim == 1 and a.size == m * n else a
    if a.shape != (m, n):
        raise ModelError(f"{name}: expected shape {(m, n)}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ModelError(f"{name}: entries must be finite")
    return a


@dataclass(frozen=True, eq=False)
class InterdictionData:
    """Structure of a min-max interdiction problem.

    Leader: min d y s.t. A x >= b, x binary.  Follower: max d y s.t. G y >= g,
    0 <= y, y_i <= u_i (1 - x_i) for i < k.  Internally d2 = -d and d1 = d.
    """

    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    g: np.ndarray
    d: np.ndarray
    u: np.ndarray


@dataclass(frozen=True, eq=False)
class MiblpInstance:
    n1: int
    n2: int
    r1: int
    r2: int
    c: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    A1: np.ndarray
    G1: np.ndarray
    b1: np.ndarray
    A2: np.ndarray
    G2: np.ndarray
    b2: np.ndarray
    lx: np.ndarray
    ux: np.ndarray
    ly: np.ndarray
    uy: np.ndarray
    L: tuple = ()
    interdiction: InterdictionData | None = None
    name: str = "instance"
    x_names: tuple = ()
    y_names: tuple = ()

    def __post_init__(self):
        n1, n2 = int(self.n1), int(self.n2)
        if n1 < 0 or n2 < 1:
            raise ModelError("need n1 >= 0 and n2 >= 1")
        if not (0 <= self.r1 <= n1 and 0 <= self.r2 <= n2):
            raise ModelError("integer counts out of range")
        set_ = lambda k, v: object.__setattr__(self, k, v)
        for k, n in (("c", n1), ("d1", n2), ("d2", n2), ("lx", n1), ("ux", n1), ("ly", n2), ("uy", n2)):
            set_(k, _vec(getattr(self, k), n, k))
        b1 = np.asarray(self.b1, dtype=float).ravel()
        b2 = np.asarray(self.b2, dtype=float).ravel()
        m1, m2 = b1.size, b2.size
        if m2 < 1:
            raise ModelError("the follower needs at least one row")
        set_("b1", _vec(b1, m1, "b1"))
        set_("b2", _vec(b2, m2, "b2"))
        set_("A1", _mat(self.A1, m1, n1, "A1"))
        set_("G1", _mat(self.G1, m1, n2, "G1"))
        set_("A2", _mat(self.A2, m2, n1, "A2"))
        set_("G2", _mat(self.G2, m2, n2, "G2"))
        if np.any(self.lx > self.ux) or np.any(self.ly > self.uy):
            raise ModelError("lower bound exceeds upper bound")
        L = linking_set(self)
        if self.L and tuple(self.L) != L:
            raise ModelError(f"declared linking set {tuple(self.L)} differs from A2 sparsity {L}")
        set_("L", L)
        if any(i >= self.r1 for i in L):
            raise ModelError("linking variables must be integer")
        if not self.x_names:
            set_("x_names", tuple(f"x{i}" for i in range(n1)))
        if not self.y_names:
            set_("y_names", tuple(f"y{i}" for i in range(n2)))
        for a in (self.c, self.d1, self.d2, self.A1, self.G1, self.b1, self.A2, self.G2,
                  self.b2, self.lx, self.ux, self.ly, self.uy):
            a.setflags(write=False)

    @property
    def m1(self):
        return self.b1.size

    @property
    def m2(self):
        return self.b2.size

    @property
    def n(self):
        return self.n1 + self.n2

    @property
    def L_arr(self):
        return np.asarray(self.L, dtype=np.int64)

    def lower(self):
        return np.concatenate([self.lx, self.ly])

    def upper(self):
        return np.concatenate([self.ux, self.uy])

    def integer_mask(self):
        mask = np.zeros(self.n, dtype=bool)
        mask[: self.r1] = True
        mask[self.n1 : self.n1 + self.r2] = True
        return mask

    def leader_value(self, x, y):
        return float(self.c @ x + self.d1 @ y)

    def all_rows(self):
        """Rows of both levels as one ``M z >= rhs`` block over z = (x, y)."""
        M = np.vstack([np.hstack([self.A1, self.G1]), np.hstack([self.A2, self.G2])])
        return M, np.concatenate([self.b1, self.b2])

    def is_pure_integer(self):
        return self.r1 == self.n1 and self.r2 == self.n2

    def with_(self, **kw):
        kw.setdefault("L", ())
        return replace(self, **kw)

    def structurally_equal(self, other, tol=0.0):
        if not isinstance(other, MiblpInstance):
            return False
        if (self.n1, self.n2, self.r1, self.r2, self.L) != (other.n1, other.n2, other.r1, other.r2, other.L):
            return False
        for k in ("c", "d1", "d2", "A1", "G1", "b1", "A2", "G2", "b2", "lx", "ux", "ly", "uy"):
            a, b = getattr(self, k), getattr(other, k)
            if a.shape != b.shape or not np.allclose(a, b, atol=tol, rtol=0):
                return False
        if (self.interdiction is None) != (other.interdiction is None):
            return False
        if self.interdiction is not None:
            for k in ("A", "b", "G", "g", "d", "u"):
                a, b = getattr(self.interdiction, k), getattr(other.interdiction, k)
                if np.shape(a) != np.shape(b) or not np.allclose(a, b, atol=tol, rtol=0):
                    return False
        return True


@dataclass
class Point:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).ravel()
        self.y = np.asarray(self.y, dtype=float).ravel()

    @classmethod
    def from_z(cls, inst, z):
        z = np.asarray(z, dtype=float)
        return cls(z[: inst.n1], z[inst.n1 :])

    @property
    def z(self):
        return np.concatenate([self.x, self.y])

    def key(self, digits=6):
        return tuple(np.round(self.z, digits))


@dataclass
class AssumptionReport:
    bounded: bool
    no_unbounded_ray: bool
    linking_integer: bool
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return self.bounded and self.no_unbounded_ray and self.linking_integer


def linking_set(inst) -> tuple:
    A2 = np.asarray(inst.A2)
    if A2.size == 0:
        return ()
    return tuple(int(i) for i in np.flatnonzero(np.any(A2 != 0, axis=0)))


SENSES = {">=": 1, "G": 1, "<=": -1, "L": -1, "=": 0, "E": 0, "==": 0}


@dataclass
class RawInstance:
    """Problem description with arbitrary row senses, objective senses and
    variable order.  ``canonicalize`` turns it into a ``MiblpInstance``."""

    c: object
    d1: object
    d2: object
    A1: object = None
    G1: object = None
    b1: object = None
    senses1: object = None
    A2: object = None
    G2: object = None
    b2: object = None
    senses2: object = None
    lx: object = None
    ux: object = None
    ly: object = None
    uy: object = None
    x_integer: object = None
    y_integer: object = None
    leader_sense: str = "min"
    follower_sense: str = "min"
    name: str = "instance"
    x_names: object = None
    y_names: object = None
    interdiction: InterdictionData | None = None


def _sense_code(s):
    key = str(s).strip()
    code = SENSES.get(key.upper() if len(key) == 1 else key)
    if code is None:
        raise ModelError(f"unknown row sense {s!r}")
    return code


def _to_ge(A, G, b, senses, n1, n2, what):
    b = np.asarray(b if b is not None else [], dtype=float).ravel()
    m = b.size
    A = _mat(A, m, n1, f"A{what}")
    G = _mat(G, m, n2, f"G{what}")
    if senses is None:
        senses = [">="] * m
    if len(senses) != m:
        raise ModelError(f"senses{what}: expected {m} entries")
    rows_a, rows_g, rhs = [], [], []
    for i, s in enumerate(senses):
        code = _sense_code(s)
        if code >= 0:
            rows_a.append(A[i]); rows_g.append(G[i]); rhs.append(b[i])
        if code <= 0:
            rows_a.append(-A[i]); rows_g.append(-G[i]); rhs.append(-b[i])
    return (np.array(rows_a).reshape(-1, n1), np.array(rows_g).reshape(-1, n2), np.array(rhs, dtype=float))


def canonicalize(raw) -> MiblpInstance:
    """Bring a raw description into canonical form.

    Rows become ``>=`` (``<=`` negated, ``=`` split), both objectives become
    minimisation, and integer variables are moved in front.  Canonical
    instances pass through unchanged.
    """
    if isinstance(raw, MiblpInstance):
        return raw
    c = np.asarray(raw.c, dtype=float).ravel()
    d1 = np.asarray(raw.d1, dtype=float).ravel()
    d2 = np.asarray(raw.d2, dtype=float).ravel()
    n1, n2 = c.size, d2.size
    if d1.size != n2:
        raise ModelError("d1 and d2 lengths differ")
    A1, G1, b1 = _to_ge(raw.A1, raw.G1, raw.b1, raw.senses1, n1, n2, "1")
    A2, G2, b2 = _to_ge(raw.A2, raw.G2, raw.b2, raw.senses2, n1, n2, "2")
    if raw.leader_sense.lower().startswith("max"):
        c, d1 = -c, -d1
    if raw.follower_sense.lower().startswith("max"):
        d2 = -d2
    xi = np.asarray(raw.x_integer if raw.x_integer is not None else np.ones(n1, bool), dtype=bool).ravel()
    yi = np.asarray(raw.y_integer if raw.y_integer is not None else np.ones(n2, bool), dtype=bool).ravel()
    if xi.size != n1 or yi.size != n2:
        raise ModelError("integrality masks have wrong length")
    px = np.concatenate([np.flatnonzero(xi), np.flatnonzero(~xi)])
    py = np.concatenate([np.flatnonzero(yi), np.flatnonzero(~yi)])
    lx = _vec(raw.lx, n1, "lx") if raw.lx is not None else np.zeros(n1)
    ly = _vec(raw.ly, n2, "ly") if raw.ly is not None else np.zeros(n2)
    if raw.ux is None or raw.uy is None:
        raise ModelError("finite upper bounds are required")
    ux = _vec(raw.ux, n1, "ux")
    uy = _vec(raw.uy, n2, "uy")
    xn = list(raw.x_names) if raw.x_names else [f"x{i}" for i in range(n1)]
    yn = list(raw.y_names) if raw.y_names else [f"y{i}" for i in range(n2)]
    return MiblpInstance(
        n1=n1, n2=n2, r1=int(xi.sum()), r2=int(yi.sum()),
        c=c[px], d1=d1[py], d2=d2[py],
        A1=A1[:, px], G1=G1[:, py], b1=b1,
        A2=A2[:, px], G2=G2[:, py], b2=b2,
        lx=lx[px], ux=ux[px], ly=ly[py], uy=uy[py],
        interdiction=raw.interdiction, name=raw.name,
        x_names=tuple(xn[i] for i in px), y_names=tuple(yn[i] for i in py),
    )


def raw_feasible(raw, x, y, tol=EPS) -> bool:
    """Membership of (x, y) in the raw constraint system (original order)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n1, n2 = x.size, y.size
    for A, G, b, s in ((raw.A1, raw.G1, raw.b1, raw.senses1), (raw.A2, raw.G2, raw.b2, raw.senses2)):
        b = np.asarray(b if b is not None else [], float).ravel()
        if b.size == 0:
            continue
        lhs = _mat(A, b.size, n1, "A") @ x + _mat(G, b.size, n2, "G") @ y
        for v, rhs, sense in zip(lhs, b, s or [">="] * b.size):
            code = _sense_code(sense)
            if code == 1 and v < rhs - tol or code == -1 and v > rhs + tol or code == 0 and abs(v - rhs) > tol:
                return False
    return True


def check_assumptions(inst: MiblpInstance) -> AssumptionReport:
    from .simplex import LpProblem, solve_lp

    bounded = bool(np.all(np.isfinite(inst.lower())) and np.all(np.isfinite(inst.upper())))
    p = LpProblem(inst.d2, inst.G2, np.zeros(inst.m2), np.zeros(inst.n2), np.ones(inst.n2))
    r = solve_lp(p)
    no_ray = not (r.optimal and r.objective < -1e-9)
    linking_integer = all(i < inst.r1 for i in inst.L)
    notes = []
    if not no_ray:
        notes.append("follower admits an improving unbounded ray")
    return AssumptionReport(bounded, no_ray, linking_integer, notes)


def follower_data_integral(inst: MiblpInstance) -> bool:
    """True when A2 x + G2 y - b2 is integral on every point of S."""
    def integral(a):
        return bool(np.all(np.abs(a - np.round(a)) <= 1e-9))

    if not (integral(inst.A2) and integral(inst.G2) and integral(inst.b2)):
        return False
    if np.any(inst.A2[:, inst.r1 :] != 0) or np.any(inst.G2[:, inst.r2 :] != 0):
        return False
    return True


def objective2_integral(inst: MiblpInstance) -> bool:
    return bool(np.all(np.abs(inst.d2 - np.round(inst.d2)) <= 1e-9)) and not np.any(inst.d2[inst.r2 :] != 0)


def interdiction_instance(A, b, G, g, d, u, uy=None, name="interdiction") -> MiblpInstance:
    """Build the canonical form of a min-max interdiction problem.

    ``A x >= b`` are leader rows over the k interdiction variables, ``G y >= g``
    the follower rows, ``u`` the upper bounds of y_0..y_{k-1} that interdiction
    switches off.  All variables are integer.
    """
    A = np.atleast_2d(np.asarray(A, float))
    G = np.atleast_2d(np.asarray(G, float))
    d = np.asarray(d, float).ravel()
    u = np.asarray(u, float).ravel()
    b = np.asarray(b, float).ravel()
    g = np.asarray(g, float).ravel()
    k = u.size
    n2 = d.size
    if A.shape[1] != k or G.shape[1] != n2 or k > n2:
        raise ModelError("interdiction data dimensions are inconsistent")
    uy = np.asarray(uy, float).ravel() if uy is not None else np.concatenate([u, np.ones(n2 - k)])
    A2 = np.vstack([np.zeros((G.shape[0], k)), -np.diag(u)]) + 0.0
    G2 = np.vstack([G, -np.eye(k, n2)]) + 0.0
    b2 = np.concatenate([g, -u])
    data = InterdictionData(A, b, G, g, d, u)
    return MiblpInstance(
        n1=k, n2=n2, r1=k, r2=n2, c=np.zeros(k), d1=d, d2=-d,
        A1=A, G1=np.zeros((A.shape[0], n2)), b1=b,
        A2=A2, G2=G2, b2=b2, lx=np.zeros(k), ux=np.ones(k),
        ly=np.zeros(n2), uy=uy, interdiction=data, name=name,
    )


def recognize_interdiction(inst: MiblpInstance) -> MiblpInstance:
    """Attach interdiction structure when the data have exactly that shape.

    Expected: binary leader of size k <= n2 with zero cost, d1 = -d2, no
    follower variables in leader rows, and the last k follower rows equal to
    -u_i x_i - y_i >= -u_i with every other follower row free of x.
    """
    if inst.interdiction is not None:
        return inst
    k, n2, m2 = inst.n1, inst.n2, inst.m2
    if not (0 < k <= n2 and m2 > k and inst.r1 == k and inst.r2 == n2):
        return inst
    if np.any(inst.c != 0) or np.any(inst.d1 != -inst.d2) or np.any(inst.G1 != 0):
        return inst
    if np.any(inst.lx != 0) or np.any(inst.ux != 1) or np.any(inst.ly != 0):
        return inst
    mg = m2 - k
    u = -inst.b2[mg:]
    if np.any(u <= 0) or np.any(inst.A2[:mg] != 0):
        return inst
    if not (np.array_equal(inst.A2[mg:], -np.diag(u)) and np.array_equal(inst.G2[mg:], -np.eye(k, n2))):
        return inst
    data = InterdictionData(inst.A1.copy(), inst.b1.copy(), inst.G2[:mg].copy(), inst.b2[:mg].copy(), inst.d1.copy(), u.copy())
    return replace(inst, interdiction=data)
