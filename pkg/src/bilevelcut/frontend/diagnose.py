"""Right-hand-side strength of a cut against the enumerated feasible set."""

from __future__ import annotations

import math

import numpy as np

from .. import bruteforce as bf
from ..simplex import LpProblem, solve_lp


def _relaxation_value(inst, extra=None):
    M, rhs = inst.all_rows()
    if extra is not None:
        M = np.vstack([M, extra[0][None, :]])
        rhs = np.append(rhs, extra[1])
    r = solve_lp(LpProblem(np.concatenate([inst.c, inst.d1]), M, rhs, inst.lower(), inst.upper()))
    return r.objective if r.optimal else math.inf


def diagnose_rhs_strength(inst, cut, enum=None, cap=bf.DEFAULT_CAP):
    """Returns (orig_rhs, best_rhs, obj_before, obj_after_orig, obj_after_best).

    ``best_rhs`` is the minimum of the cut's left-hand side over the points it
    must keep; it is ``inf`` when that set is empty. Objective values are the
    leader's LP relaxation bound without the cut, with it, and with its
    right-hand side raised to ``best_rhs``.
    """
    if enum is None:
        enum = bf.enumerate(inst, cap=cap)
    Z = bf.scope_points(inst, enum, cut)
    best = float(np.min(Z @ cut.alpha)) if len(Z) else math.inf
    before = _relaxation_value(inst)
    after = _relaxation_value(inst, (cut.alpha, cut.beta))
    after_best = math.inf if math.isinf(best) else _relaxation_value(inst, (cut.alpha, best))
    return float(cut.beta), best, before, after, after_best
