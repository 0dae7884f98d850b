"""Configuration matrix and oracle-backed validation of solver runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import bruteforce as bf
from .. import cuts as C
from ..search import IC_CLASSES, BranchAndCut, SolverConfig, bundle, applicable_bundles

SEP_TOL = 1e-6
GEOM_TOL = 1e-6


def config_matrix(inst, branchings=("fractional",)):
    """Each applicable cut class alone (ICs under Always and XYInt), the
    applicable default bundles and a no-cuts baseline."""
    probe = BranchAndCut(inst, SolverConfig(cuts=set(C_ALL)))
    live = probe.enabled
    out = [bundle("none", name="none")]
    for cls in C_ALL:
        if cls not in live:
            continue
        if cls in ("isic1", "isic2", "idic"):
            for s in ("Always", "XYInt"):
                out.append(SolverConfig(cuts={cls}, ic_strategy={cls: s}, name=f"{cls}:{s}"))
        else:
            out.append(SolverConfig(cuts={cls}, name=cls))
    for b in applicable_bundles(inst):
        out.append(bundle(b, name=f"bundle:{b}"))
    if len(branchings) > 1:
        extra = []
        for cfg in out:
            for br in branchings:
                if br != cfg.branching:
                    extra.append(SolverConfig(**{**cfg.__dict__, "branching": br, "name": f"{cfg.name}/{br}"}))
        out += extra
    return out


C_ALL = ("integer_no_good", "benders_binary", "benders_interdiction", "generalized_no_good",
         "isic1", "isic2", "idic", "hypercube")


@dataclass
class RunCheck:
    config: str
    value: float
    expected: float
    nodes: int
    cuts: int
    invalid: list = field(default_factory=list)
    weak: list = field(default_factory=list)
    geometry: list = field(default_factory=list)
    order: list = field(default_factory=list)
    stats: object = None

    @property
    def match(self):
        if math.isinf(self.expected) or math.isinf(self.value):
            return math.isinf(self.expected) and math.isinf(self.value)
        return abs(self.value - self.expected) <= 1e-6 * max(1.0, abs(self.expected))

    @property
    def ok(self):
        return self.match and not (self.invalid or self.weak or self.geometry or self.order)


def check_ic_geometry(cut):
    """Problems with an intersection cut's recorded geometry (empty if fine)."""
    bad = []
    pts = cut.meta.get("points")
    if pts is None:
        return bad
    scale = max(1.0, np.abs(cut.alpha).max())
    for p in pts:
        if abs(cut.alpha @ p - cut.beta) > GEOM_TOL * scale:
            bad.append(("off_hyperplane", cut.origin, float(cut.alpha @ p - cut.beta)))
    if cut.meta.get("interior", math.inf) < C.INTERIOR_TOL:
        bad.append(("not_interior", cut.origin, cut.meta["interior"]))
    return bad


def check_event_order(stats):
    """linking-excluding cuts must come after the matching fixed-linking solve."""
    seen, bad = set(), []
    for ev in stats.events:
        if ev[0] == "ub":
            seen.add(tuple(ev[1]))
        elif ev[0] == "cut" and ev[1] in ("hypercube", "generalized_no_good"):
            if tuple(ev[2]) not in seen:
                bad.append(ev)
    return bad


def run_and_check(inst, cfg: SolverConfig, enum=None):
    enum = enum if enum is not None else bf.enumerate(inst)
    cfg = SolverConfig(**{**cfg.__dict__, "record_cuts": True})
    res = BranchAndCut(inst, cfg).run()
    chk = RunCheck(cfg.name, res.value, enum.value, res.stats.nodes, len(res.stats.cut_log), stats=res.stats)
    for node_id, cut in res.stats.cut_log:
        v = bf.scope_violations(inst, enum, cut)
        if len(v):
            chk.invalid.append((cut.origin, node_id, v[0].tolist()))
        if cut.meta.get("violation", 0.0) < SEP_TOL:
            chk.weak.append((cut.origin, node_id, cut.meta.get("violation")))
        chk.geometry += check_ic_geometry(cut)
    chk.order = check_event_order(res.stats)
    return chk
