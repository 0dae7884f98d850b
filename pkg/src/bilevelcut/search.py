"""Branch-and-cut driver."""

from __future__ import annotations

import heapq
import math
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import cuts as C
from .bilevel import BilevelOracle
from .model import EPS, MiblpInstance, Point, check_assumptions
from .simplex import LpProblem, solve_lp

STRATEGIES = ("Always", "AlwaysRoot", "XYInt", "LInt", "YInt", "YLInt")
BRANCHING = ("fractional", "linking", "second_level")
IC_CLASSES = ("isic1", "isic2", "idic", "hypercube")
CUT_CLASSES = (
    "integer_no_good", "benders_binary", "benders_interdiction", "generalized_no_good",
    "isic1", "isic2", "idic", "hypercube",
)
# classes gated by the vertex-structure strategy
STRATEGY_GATED = ("isic1", "isic2", "idic")


@dataclass
class SolverConfig:
    cuts: frozenset = frozenset()
    ic_strategy: dict = field(default_factory=dict)
    branching: str = "fractional"
    tailoff_threshold: float = 0.05
    milp_integrality_cuts: bool = False
    time_limit: float = math.inf
    node_limit: int = 1_000_000
    eps: float = EPS
    max_cut_rounds: int = 100
    record_cuts: bool = False
    idic_auto_off: bool = False
    name: str = ""

    def __post_init__(self):
        self.cuts = frozenset(self.cuts)
        unknown = self.cuts - set(CUT_CLASSES)
        if unknown:
            raise ValueError(f"unknown cut classes {sorted(unknown)}")
        if self.branching not in BRANCHING:
            raise ValueError(f"unknown branching strategy {self.branching!r}")
        if not 0 < self.tailoff_threshold < 1:
            raise ValueError("tailoff threshold must lie in (0, 1)")
        for k, s in self.ic_strategy.items():
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r} for {k}")

    def strategy(self, cls):
        return self.ic_strategy.get(cls, "Always")


def bundle(kind, **kw) -> SolverConfig:
    """Default cut bundles by instance type."""
    if kind == "pure_integer":
        cfg = dict(cuts={"idic", "isic1"}, ic_strategy={"idic": "Always", "isic1": "LInt"})
    elif kind == "binary_first_level":
        cfg = dict(cuts={"benders_binary", "generalized_no_good", "isic1", "idic"},
                   ic_strategy={"isic1": "XYInt", "idic": "Always"})
    elif kind == "interdiction":
        cfg = dict(cuts={"benders_binary", "benders_interdiction", "isic1"},
                   ic_strategy={"isic1": "LInt"}, branching="linking", milp_integrality_cuts=False)
    elif kind == "none":
        cfg = dict(cuts=set())
    else:
        raise ValueError(f"unknown bundle {kind!r}")
    cfg.update(kw)
    cfg.setdefault("name", kind)
    return SolverConfig(**cfg)


def default_config(inst: MiblpInstance, **kw) -> SolverConfig:
    if inst.interdiction is not None:
        return bundle("interdiction", **kw)
    if inst.r1 == inst.n1 and np.all(inst.lx >= 0) and np.all(inst.ux <= 1):
        return bundle("binary_first_level", **kw)
    return bundle("pure_integer", **kw)


def applicable_bundles(inst):
    out = ["pure_integer"]
    L = list(inst.L)
    if L and np.all(inst.lx[L] >= 0) and np.all(inst.ux[L] <= 1):
        out.append("binary_first_level")
    if inst.interdiction is not None:
        out.append("interdiction")
    return out


@dataclass
class VertexStructure:
    x_int: bool
    xL_int: bool
    y_int: bool
    linking_fixed: bool
    depth: int

    @property
    def in_S(self):
        return self.x_int and self.y_int


@dataclass
class SearchNode:
    id: int
    lo: np.ndarray
    up: np.ndarray
    depth: int = 0
    bound: float = -math.inf
    local_cuts: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    parent_obj: float | None = None
    branch: tuple | None = None  # (var, direction, fraction)


@dataclass
class SolveStats:
    nodes: int = 0
    lp_solves: int = 0
    oracle_calls: Counter = field(default_factory=Counter)
    cg_calls: Counter = field(default_factory=Counter)
    cuts_added: Counter = field(default_factory=Counter)
    failures: dict = field(default_factory=lambda: defaultdict(Counter))
    integrality_cuts: int = 0
    times: Counter = field(default_factory=Counter)
    root_bound_before: float = -math.inf
    root_bound_after: float = -math.inf
    bound_history: list = field(default_factory=list)
    events: list = field(default_factory=list)
    cut_log: list = field(default_factory=list)

    def failure_rate(self, classes=IC_CLASSES):
        calls = sum(self.cg_calls[c] for c in classes)
        fails = sum(sum(self.failures[c].values()) for c in classes)
        return fails / calls if calls else 0.0

    def as_dict(self):
        return {
            "nodes": self.nodes,
            "lp_solves": self.lp_solves,
            "oracle_calls": dict(self.oracle_calls),
            "cg_calls": dict(self.cg_calls),
            "cuts_added": dict(self.cuts_added),
            "failures": {k: dict(v) for k, v in self.failures.items()},
            "integrality_cuts": self.integrality_cuts,
            "times": dict(self.times),
            "root_bound_before": self.root_bound_before,
            "root_bound_after": self.root_bound_after,
        }


@dataclass
class SolveResult:
    status: str
    point: Point | None
    value: float
    bound: float
    stats: SolveStats

    @property
    def gap(self):
        if self.point is None or not math.isfinite(self.bound):
            return math.inf
        return max(0.0, (self.value - self.bound) / max(1.0, abs(self.value)))


def should_generate(cls, vs: VertexStructure, strategy="Always", depth=None) -> bool:
    depth = vs.depth if depth is None else depth
    if cls == "integer_no_good":
        return vs.in_S
    if cls in ("benders_binary", "benders_interdiction", "generalized_no_good", "hypercube"):
        return vs.xL_int
    if vs.in_S:
        # a vertex of S outside F has to be cut off whatever the strategy says
        return True
    return {
        "Always": True,
        "AlwaysRoot": depth == 0,
        "XYInt": vs.in_S,
        "LInt": vs.xL_int,
        "YInt": vs.y_int,
        "YLInt": vs.y_int or vs.xL_int,
    }[strategy]


_NEEDS_SECOND_LEVEL = ("isic1", "benders_binary", "benders_interdiction")


def oracle_policy(vs: VertexStructure, config: SolverConfig) -> dict:
    second = vs.in_S or vs.linking_fixed or any(
        c in config.cuts and should_generate(c, vs, config.strategy(c)) for c in _NEEDS_SECOND_LEVEL
    )
    ub = vs.linking_fixed or (vs.xL_int and bool({"hypercube", "generalized_no_good"} & config.cuts))
    return {"solve_second_level": bool(second), "solve_ub": bool(ub)}


def tailoff_check(history, threshold=0.05) -> bool:
    if len(history) < 2:
        return True
    prev, last = history[-2], history[-1]
    return abs(last - prev) / max(1.0, abs(prev)) >= threshold


def _frac(v):
    return abs(v - round(v))


def select_branching(inst, node, x, strategy, pseudocosts=None, tol=EPS):
    """Return (variable, split_value) with children z_j <= split and
    z_j >= split + 1, or None when no candidate exists."""
    n1 = inst.n1
    mask = inst.integer_mask()
    frac_idx = [j for j in np.flatnonzero(mask) if _frac(x[j]) > tol]
    L = [i for i in inst.L if node.up[i] > node.lo[i] + 0.5]
    if strategy == "fractional":
        cands = frac_idx
    elif strategy == "linking":
        cands = L
    else:
        cands = [j for j in frac_idx if j >= n1] or frac_idx
    if not cands:
        return None

    def score(j):
        f = _frac(x[j])
        if f <= tol:
            fd = fu = 1.0
        else:
            fd, fu = x[j] - math.floor(x[j]), math.ceil(x[j]) - x[j]
        if pseudocosts is None:
            return fd * fu
        down = pseudocosts.estimate(j, 0) * fd
        up = pseudocosts.estimate(j, 1) * fu
        return max(down, 1e-6) * max(up, 1e-6)

    best = max(cands, key=lambda j: (score(j), -j))
    v = x[best]
    if _frac(v) > tol:
        split = math.floor(v)
    else:
        v = round(v)
        split = v if v < node.up[best] else v - 1
    return int(best), float(split)


class Pseudocosts:
    def __init__(self, n):
        self.sum = np.zeros((n, 2))
        self.cnt = np.zeros((n, 2))

    def update(self, j, direction, gain, f):
        if f > 0 and math.isfinite(gain):
            self.sum[j, direction] += max(gain, 0.0) / f
            self.cnt[j, direction] += 1

    def estimate(self, j, direction):
        if self.cnt[j, direction] > 0:
            return self.sum[j, direction] / self.cnt[j, direction]
        tot = self.cnt[:, direction].sum()
        return self.sum[:, direction].sum() / tot if tot else 1.0


class BranchAndCut:
    def __init__(self, inst: MiblpInstance, config: SolverConfig):
        self.inst = inst
        self.cfg = config
        self.oracle = BilevelOracle(inst, config.eps)
        self.stats = SolveStats()
        M, rhs = inst.all_rows()
        self.base_A, self.base_b = M, rhs
        self.c = np.concatenate([inst.c, inst.d1])
        self.pool = []  # global cuts
        self.excluded = []  # linking values removed by global cuts
        self.best_point = None
        self.best_val = math.inf
        self.pc = Pseudocosts(inst.n)
        self.enabled = set(config.cuts)
        self._static_filter()
        mask = inst.integer_mask()
        self.obj_integral = bool(np.all(self.c[~mask] == 0) and np.all(np.abs(self.c - np.round(self.c)) <= 1e-12))
        self.L = inst.L_arr
        self._next_id = 0
        self._t0 = time.process_time()

    # setup --------------------------------------------------------------------
    def _static_filter(self):
        inst = self.inst
        from .model import follower_data_integral, objective2_integral

        L = list(inst.L)
        binary_L = bool(L) and np.all(inst.lx[L] >= 0) and np.all(inst.ux[L] <= 1)
        drop = set()
        if not follower_data_integral(inst):
            drop |= {"isic1", "isic2", "idic", "hypercube"}
        if not objective2_integral(inst):
            drop |= {"isic2", "idic"}
        if not binary_L:
            drop |= {"benders_binary", "generalized_no_good"}
        if inst.interdiction is None:
            drop.add("benders_interdiction")
        if not inst.is_pure_integer():
            drop.add("integer_no_good")
        if not L:
            drop.add("hypercube")
        self.disabled = drop & self.enabled
        self.enabled -= drop

    # helpers ------------------------------------------------------------------
    def _new_id(self):
        self._next_id += 1
        return self._next_id - 1

    def _prune_level(self):
        if self.best_point is None:
            return math.inf
        if self.obj_integral:
            return self.best_val - 1 + 1e-6
        return self.best_val - 1e-6 * max(1.0, abs(self.best_val))

    def _update_incumbent(self, p: Point, val, source):
        if val < self.best_val - 1e-9:
            z = p.z.copy()
            mask = self.inst.integer_mask()
            z[mask] = np.round(z[mask])
            self.best_point = Point.from_z(self.inst, z)
            self.best_val = float(self.c @ z)
            self.stats.events.append(("incumbent", source, float(val)))

    def _lp(self, node):
        rows = [self.base_A] + [c.alpha[None, :] for c in self.pool] + [c.alpha[None, :] for c in node.local_cuts]
        rhs = [self.base_b] + [np.array([c.beta]) for c in self.pool] + [np.array([c.beta]) for c in node.local_cuts]
        return LpProblem(self.c, np.vstack(rows), np.concatenate(rhs), node.lo, node.up)

    def _structure(self, node, z):
        inst = self.inst
        x, y = z[: inst.n1], z[inst.n1 :]
        L = self.L
        return VertexStructure(
            x_int=bool(np.all(np.abs(x[: inst.r1] - np.round(x[: inst.r1])) <= EPS)),
            xL_int=bool(np.all(np.abs(x[L] - np.round(x[L])) <= EPS)),
            y_int=bool(np.all(np.abs(y[: inst.r2] - np.round(y[: inst.r2])) <= EPS)),
            linking_fixed=bool(np.all(node.up[L] - node.lo[L] < 0.5)) if L.size else True,
            depth=node.depth,
        )

    def _best_ub(self, gamma):
        t = time.process_time()
        out = self.oracle.best_ub(gamma)
        self.stats.times["oracle"] += time.process_time() - t
        key = tuple(int(v) for v in np.round(gamma))
        if ("ub", key) not in self._ub_seen:
            self._ub_seen.add(("ub", key))
            self.stats.events.append(("ub", key))
        if out is not None:
            self._update_incumbent(out[0], out[1], "ub")
        return out

    # cut generation -------------------------------------------------------------
    def _record(self, cls, res, node, lpres):
        st = self.stats
        st.cg_calls[cls] += 1
        if isinstance(res, C.CutFailure) or res is None:
            reason = res.reason if res is not None else C.NO_CERTIFICATE
            st.failures[cls][reason] += 1
            return None
        z = lpres.x
        scale = max(1.0, np.abs(res.alpha).max())
        if res.violation(z) < self.cfg.eps * scale:
            st.failures[cls][C.NUMERICS] += 1
            return None
        st.cuts_added[cls] += 1
        res.meta["vertex"] = z.copy()
        res.meta["violation"] = res.violation(z) / scale
        return res

    def _attach_scope(self, cut, node):
        """Record where a cut is valid.

        Cuts read off the node's LP basis hold only inside the node box and
        away from every linking value already excluded there.
        """
        own = (cut.gamma,) if cut.gamma is not None else ()
        if cut.origin.startswith("benders"):
            cut.domain, cut.excluded = None, ()
        elif cut.origin == "generalized_no_good":
            cut.domain, cut.excluded = None, own
        else:
            cut.domain = (node.lo.copy(), node.up.copy())
            cut.excluded = tuple(self.excluded) + tuple(node.excluded) + own

    def _generate(self, node, lpres, vs, ystar):
        inst, cfg = self.inst, self.cfg
        out = []
        gamma = tuple(int(v) for v in np.round(lpres.x[self.L])) if vs.xL_int else None
        for cls in CUT_CLASSES:
            if cls not in self.enabled:
                continue
            if not should_generate(cls, vs, cfg.strategy(cls)):
                continue
            t = time.process_time()
            if cls == "integer_no_good":
                res = C.gen_integer_no_good(inst, lpres)
            elif cls == "benders_binary":
                res = C.gen_benders_binary(inst, lpres, ystar, self.oracle.big_m(ystar) if ystar is not None else 0.0)
            elif cls == "benders_interdiction":
                if ystar is None:
                    res = C.CutFailure(C.NO_CERTIFICATE)
                else:
                    Lp, Lm = C.interdiction_sign_sets(inst)
                    res = C.gen_benders_interdiction(inst, lpres, ystar, self.oracle.big_m_interdiction(ystar, Lp, Lm))
            elif cls == "generalized_no_good":
                self._best_ub(gamma)
                res = C.gen_generalized_no_good(inst, gamma, self.oracle.ub_solved(gamma))
            elif cls == "hypercube":
                self._best_ub(gamma)
                res = C.gen_hypercube_ic(inst, lpres, self.oracle.ub_solved(gamma))
            elif cls == "isic1":
                res = C.gen_isic_type1(inst, lpres, ystar)
            elif cls == "isic2":
                res = C.gen_isic_type2(inst, lpres, self.oracle)
            elif cls == "idic":
                res = C.gen_idic(inst, lpres, self.oracle)
            self.stats.times["cuts"] += time.process_time() - t
            cut = self._record(cls, res, node, lpres)
            if cut is not None:
                self._attach_scope(cut, node)
                out.append(cut)
        if cfg.idic_auto_off and "idic" in self.enabled and self.stats.cg_calls["idic"] >= 20:
            fails = sum(self.stats.failures["idic"].values())
            if fails / self.stats.cg_calls["idic"] > 0.9:
                self.enabled.discard("idic")
        return out

    def _add_cuts(self, node, new):
        for cut in new:
            if cut.domain is None:
                self.pool.append(cut)
                if cut.scope == C.LINKING_EXCLUDING:
                    self.excluded.append(cut.gamma)
            else:
                node.local_cuts.append(cut)
                if cut.scope == C.LINKING_EXCLUDING:
                    node.excluded.append(cut.gamma)
            self.stats.events.append(("cut", cut.origin, cut.gamma))
            if self.cfg.record_cuts:
                self.stats.cut_log.append((node.id, cut))

    # node processing ------------------------------------------------------------
    def _process(self, node):
        """Bound the node.  Returns a list of children (possibly empty)."""
        inst, cfg, st = self.inst, self.cfg, self.stats
        history = []
        rounds = 0
        while True:
            t = time.process_time()
            lpres = solve_lp(self._lp(node))
            st.times["lp"] += time.process_time() - t
            st.lp_solves += 1
            if lpres.status == "infeasible":
                return []
            if not lpres.optimal:
                raise RuntimeError(f"LP solver failed with status {lpres.status}")
            obj = lpres.objective
            if rounds == 0 and node.branch is not None and node.parent_obj is not None:
                j, direction, f = node.branch
                self.pc.update(j, direction, obj - node.parent_obj, f)
            node.bound = max(node.bound, obj)
            history.append(obj)
            if node.id == 0:
                if rounds == 0:
                    st.root_bound_before = obj
                st.root_bound_after = obj
            if obj > self._prune_level():
                return []
            z = lpres.x
            p = Point.from_z(inst, z)
            vs = self._structure(node, z)
            if vs.linking_fixed:
                self._best_ub(z[self.L] if self.L.size else np.zeros(0))
                return []
            pol = oracle_policy(vs, cfg)
            ystar = None
            infeasible_S = False
            if vs.in_S:
                t = time.process_time()
                verdict = self.oracle.check_feasibility(p)
                st.times["oracle"] += time.process_time() - t
                if verdict.feasible:
                    self._update_incumbent(p, obj, "lp")
                    return []
                infeasible_S = True
                if verdict.certificate is not None:
                    ystar = verdict.certificate.y
                if verdict.reaction is not None:
                    self._update_incumbent(Point(p.x, verdict.reaction), inst.leader_value(p.x, verdict.reaction), "reaction")
            elif pol["solve_second_level"]:
                t = time.process_time()
                val, yopt = self.oracle.phi_rhs(self.oracle.follower_rhs(p.x))
                if math.isfinite(val) and inst.d2 @ p.y > val + cfg.eps:
                    ystar = yopt
                if vs.x_int and math.isfinite(val):
                    yr = self.oracle.reaction(p.x)
                    if yr is not None:
                        self._update_incumbent(Point(p.x, yr), inst.leader_value(p.x, yr), "reaction")
                st.times["oracle"] += time.process_time() - t
            if pol["solve_ub"] and vs.xL_int:
                self._best_ub(z[self.L])
                if obj > self._prune_level():
                    return []
            if rounds > 0 and not infeasible_S and not tailoff_check(history, cfg.tailoff_threshold):
                break
            new = []
            if self.enabled:
                new = self._generate(node, lpres, vs, ystar)
            if cfg.milp_integrality_cuts and not vs.in_S:
                t = time.process_time()
                gom = C.simple_integrality_cuts(inst, lpres)
                st.times["cuts"] += time.process_time() - t
                for g in gom:
                    self._attach_scope(g, node)
                    g.meta["vertex"] = lpres.x.copy()
                    g.meta["violation"] = g.violation(lpres.x) / max(1.0, np.abs(g.alpha).max())
                st.integrality_cuts += len(gom)
                new += gom
            if not new:
                break
            self._add_cuts(node, new)
            rounds += 1
            if rounds >= cfg.max_cut_rounds or self._out_of_time():
                break
        return self._branch(node, lpres, vs, infeasible_S)

    def _branch(self, node, lpres, vs, infeasible_S):
        inst = self.inst
        z = lpres.x
        choice = select_branching(inst, node, z, self.cfg.branching, self.pc)
        if choice is None:
            # integral vertex that could not be cut off: split on a linking variable
            free = [i for i in inst.L if node.up[i] > node.lo[i] + 0.5]
            if not free:
                self._best_ub(z[self.L])
                return []
            choice = select_branching(inst, node, z, "linking", self.pc)
        j, split = choice
        f = z[j] - split if _frac(z[j]) > EPS else 1.0
        kids = []
        for direction in (0, 1):
            lo, up = node.lo.copy(), node.up.copy()
            if direction == 0:
                up[j] = split
                frac = f if f < 1.0 else 1.0
            else:
                lo[j] = split + 1
                frac = (split + 1 - z[j]) if _frac(z[j]) > EPS else 1.0
            if lo[j] > up[j]:
                continue
            kids.append(SearchNode(
                self._new_id(), lo, up, node.depth + 1, node.bound, list(node.local_cuts), list(node.excluded),
                parent_obj=lpres.objective, branch=(j, direction, max(frac, 1e-6)),
            ))
        return kids

    def _out_of_time(self):
        return time.process_time() - self._t0 > self.cfg.time_limit

    # main loop ----------------------------------------------------------------
    def run(self) -> SolveResult:
        inst, st = self.inst, self.stats
        self._ub_seen = set()
        root = SearchNode(self._new_id(), inst.lower(), inst.upper())
        heap = []
        nxt = root
        status = "optimal"
        while nxt is not None or heap:
            if nxt is None:
                _, _, node = heapq.heappop(heap)
            else:
                node, nxt = nxt, None
            if node.bound > self._prune_level():
                continue
            if st.nodes >= self.cfg.node_limit or self._out_of_time():
                heapq.heappush(heap, (node.bound, node.id, node))
                status = "limit"
                break
            st.nodes += 1
            kids = self._process(node)
            if kids:
                nxt = kids[0]
                for k in kids[1:]:
                    heapq.heappush(heap, (k.bound, k.id, k))
            open_bounds = [b for b, _, _ in heap] + ([nxt.bound] if nxt is not None else [])
            lb = min(open_bounds) if open_bounds else self.best_val
            lb = min(lb, self.best_val)
            st.bound_history.append((st.nodes, lb, self.best_val))
        for k, v in self.oracle.calls.items():
            st.oracle_calls[k] = v
        st.times["total"] = time.process_time() - self._t0
        if status == "limit":
            open_bounds = [n.bound for _, _, n in heap]
            bound = min(open_bounds + [self.best_val]) if open_bounds else self.best_val
            return SolveResult("limit", self.best_point, self.best_val, bound, st)
        if self.best_point is None:
            return SolveResult("infeasible", None, math.inf, math.inf, st)
        verdict = self.oracle.check_feasibility(self.best_point, certificate=False)
        if not verdict.feasible:
            raise AssertionError(f"incumbent failed the feasibility check: {verdict.flags}")
        return SolveResult("optimal", self.best_point, self.best_val, self.best_val, st)


def solve(inst: MiblpInstance, config: SolverConfig | None = None, check=True) -> SolveResult:
    if config is None:
        config = default_config(inst)
    if check:
        rep = check_assumptions(inst)
        if not rep.ok:
            raise ValueError(f"instance violates the solver assumptions: {rep}")
    return BranchAndCut(inst, config).run()
