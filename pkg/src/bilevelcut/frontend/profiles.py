"""Performance, baseline and cumulative profiles over bench records.

Every profile is a list of step-CDF points ``(config, side, x, fraction)``.
A config's curve jumps to ``fraction`` at ``x``; ``fraction`` counts the
included instances whose value is ``<= x`` divided by the number of
included instances.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict

SOLVED = ("optimal", "infeasible")
KINDS = ("performance", "baseline", "cumulative")


def _get(rec, key):
    return rec[key] if isinstance(rec, dict) else getattr(rec, key)


def _solved(rec):
    return _get(rec, "status") in SOLVED


def _table(records):
    tab = defaultdict(dict)
    configs = []
    for r in records:
        cfg = _get(r, "config")
        if cfg not in configs:
            configs.append(cfg)
        tab[_get(r, "instance")][cfg] = r
    return tab, configs


def filter_instances(tab, configs, kind, min_time_all=1.0, min_time_any=0.01):
    """Instance ids that survive the filters.

    Dropped: instances every config solved in under ``min_time_all`` seconds,
    instances some config solved in under ``min_time_any`` seconds, then
    unsolved-by-all (performance, baseline) or no-solution-by-all
    (cumulative)."""
    keep = []
    for inst, row in tab.items():
        recs = [row[c] for c in configs if c in row]
        if len(recs) < len(configs):
            continue
        solved = [r for r in recs if _solved(r)]
        if len(solved) == len(recs) and all(float(_get(r, "cpu")) < min_time_all for r in recs):
            continue
        if any(float(_get(r, "cpu")) < min_time_any for r in solved):
            continue
        if kind in ("performance", "baseline") and not solved:
            continue
        if kind == "cumulative" and not solved and not any(math.isfinite(float(_get(r, "gap"))) for r in recs):
            continue
        keep.append(inst)
    return keep


def _measure(rec, measure):
    if measure == "cpu":
        return float(_get(rec, "cpu")) if _solved(rec) else math.inf
    if measure == "nodes":
        return float(_get(rec, "nodes")) if _solved(rec) else math.inf
    v = float(_get(rec, measure))
    return v if math.isfinite(v) else math.inf


def _ratio(a, b):
    # unsolved is +inf; inf/inf counts as a tie
    if math.isinf(a) and math.isinf(b):
        return 1.0
    if b == 0:
        return 1.0 if a == 0 else math.inf
    return a / b


def _cdf(values, n):
    """Step points of the empirical CDF of the finite values over n items."""
    pts = []
    finite = sorted(v for v in values if math.isfinite(v))
    for i, v in enumerate(finite):
        if i + 1 < len(finite) and finite[i + 1] == v:
            continue
        pts.append((v, (i + 1) / n))
    return pts


def profiles(records, kind, baseline_name=None, measure=None, min_time_all=1.0, min_time_any=0.01):
    if kind not in KINDS:
        raise ValueError(f"unknown profile kind {kind!r}")
    tab, configs = _table(records)
    if kind == "baseline":
        if baseline_name is None or baseline_name not in configs:
            raise ValueError(f"baseline config {baseline_name!r} not among the records")
    insts = filter_instances(tab, configs, kind, min_time_all, min_time_any)
    n = len(insts)
    out = []
    if n == 0:
        return out
    if kind == "performance":
        measure = measure or "cpu"
        for cfg in configs:
            vals = []
            for i in insts:
                best = min(_measure(tab[i][c], measure) for c in configs)
                vals.append(_ratio(_measure(tab[i][cfg], measure), best))
            out += [(cfg, measure, x, f) for x, f in _cdf(vals, n)]
    elif kind == "baseline":
        measure = measure or "nodes"
        for cfg in configs:
            vals = [_ratio(_measure(tab[i][cfg], measure), _measure(tab[i][baseline_name], measure)) for i in insts]
            out += [(cfg, measure, x, f) for x, f in _cdf(vals, n)]
    else:
        for cfg in configs:
            times = [_measure(tab[i][cfg], "cpu") for i in insts]
            out += [(cfg, "time", x, f) for x, f in _cdf(times, n)]
        for cfg in configs:
            gaps = [0.0 if _solved(tab[i][cfg]) else _measure(tab[i][cfg], "gap") for i in insts]
            out += [(cfg, "gap", x, f) for x, f in _cdf(gaps, n)]
    return out


def write_profile_csv(rows, path, kind):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "config", "side", "x", "fraction"])
        for cfg, side, x, f in rows:
            w.writerow([kind, cfg, side, repr(float(x)), repr(float(f))])
