"""Command line entry point."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .. import bruteforce as bf
from ..bilevel import BilevelOracle
from ..model import Point
from ..search import CUT_CLASSES, STRATEGIES, default_config, solve
from .bench import read_records, run_manifest, write_records
from .generators import FAMILIES, generate
from .io_json import parse_json, write_json
from .mps import parse_mps_aux
from .profiles import KINDS, profiles, write_profile_csv

BRANCH_FLAGS = {"frac": "fractional", "link": "linking", "second": "second_level"}


def read_instance(path, aux=None, one_based=False):
    path = Path(path)
    if path.suffix.lower() == ".json":
        return parse_json(path)
    aux = Path(aux) if aux else path.with_suffix(".aux")
    return parse_mps_aux(path, aux, one_based=one_based)


def _load(args):
    return read_instance(args.instance, args.aux, args.aux_one_based)


def _fmt_vec(v):
    return "(" + ", ".join(f"{float(t):g}" for t in v) + ")"


def cmd_solve(args):
    inst = _load(args)
    kw = {}
    if args.branch:
        kw["branching"] = BRANCH_FLAGS[args.branch]
    if args.tailoff is not None:
        kw["tailoff_threshold"] = args.tailoff
    if args.time_limit is not None:
        kw["time_limit"] = args.time_limit
    cfg = default_config(inst, **kw)
    if args.cuts is not None:
        cfg.cuts = frozenset(c for c in args.cuts.split(",") if c)
        bad = cfg.cuts - set(CUT_CLASSES)
        if bad:
            raise SystemExit(f"unknown cut classes: {', '.join(sorted(bad))}")
    if args.ic_strategy:
        cfg.ic_strategy = {c: args.ic_strategy for c in ("isic1", "isic2", "idic")}
    res = solve(inst, cfg)
    print(f"status {res.status}")
    if res.point is not None:
        print(f"objective {res.value:g}")
        print(f"x {_fmt_vec(res.point.x)}")
        print(f"y {_fmt_vec(res.point.y)}")
    print(f"nodes {res.stats.nodes}  cpu {res.stats.times['total']:.3f}s")
    if args.json_out:
        out = {
            "status": res.status, "value": None if math.isinf(res.value) else res.value,
            "bound": None if math.isinf(res.bound) else res.bound,
            "x": None if res.point is None else res.point.x.tolist(),
            "y": None if res.point is None else res.point.y.tolist(),
            "stats": res.stats.as_dict(),
        }
        Path(args.json_out).write_text(json.dumps(out, indent=1, default=str) + "\n", encoding="utf-8")
    return 0


def cmd_check(args):
    inst = _load(args)
    z = np.array([float(t) for t in args.point.split(",")])
    if len(z) != inst.n:
        raise SystemExit(f"point has {len(z)} entries, instance has {inst.n} variables")
    v = BilevelOracle(inst).check_feasibility(Point.from_z(inst, z), certificate=False)
    print("feasible" if v.feasible else "infeasible: " + ", ".join(sorted(v.flags)))
    if v.phi_value is not None:
        print(f"phi {v.phi_value:g}")
    return 0 if v.feasible else 1


def cmd_oracle(args):
    inst = _load(args)
    res = bf.enumerate(inst)
    print(f"bilevel feasible points {len(res.feasible_set)}")
    if res.optimum is None:
        print("infeasible")
        return 0
    p, val = res.optimum
    print(f"objective {val:g}")
    print(f"x {_fmt_vec(p.x)}")
    print(f"y {_fmt_vec(p.y)}")
    return 0


def cmd_gen(args):
    size = dict(json.loads(args.size)) if args.size else {}
    inst = generate(args.family, seed=args.seed, **size)
    write_json(inst, args.out)
    return 0


def cmd_bench(args):
    write_records(run_manifest(args.manifest, jobs=args.jobs), args.out)
    return 0


def cmd_profile(args):
    rows = profiles(read_records(args.records), args.kind, args.baseline, measure=args.measure,
                    min_time_all=args.min_time_all, min_time_any=args.min_time_any)
    write_profile_csv(rows, args.out, args.kind)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="bilevelcut", description="Branch-and-cut for mixed integer bilevel linear programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def inst_args(sp):
        sp.add_argument("instance")
        sp.add_argument("--aux", help="AUX file (default: instance path with .aux)")
        sp.add_argument("--aux-one-based", action="store_true", help="AUX indices start at 1")

    s = sub.add_parser("solve", help="solve an instance")
    inst_args(s)
    s.add_argument("--cuts", help="comma-separated cut classes: " + ",".join(CUT_CLASSES))
    s.add_argument("--ic-strategy", choices=STRATEGIES)
    s.add_argument("--branch", choices=sorted(BRANCH_FLAGS))
    s.add_argument("--tailoff", type=float)
    s.add_argument("--time-limit", type=float)
    s.add_argument("--json-out")
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("check", help="check bilevel feasibility of a point")
    inst_args(s)
    s.add_argument("--point", required=True, help="comma-separated x then y values")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("oracle", help="solve by enumeration")
    inst_args(s)
    s.set_defaults(fn=cmd_oracle)

    s = sub.add_parser("gen", help="generate a random instance as JSON")
    s.add_argument("family", choices=FAMILIES + ("xu_like",))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--size", help='JSON object of size parameters, e.g. {"n1": 3}')
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_gen)

    s = sub.add_parser("bench", help="run a benchmark manifest")
    s.add_argument("manifest")
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(fn=cmd_bench)

    s = sub.add_parser("profile", help="compute a profile from bench records")
    s.add_argument("records")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--baseline")
    s.add_argument("--measure", choices=("cpu", "nodes", "root_gap_after", "root_gap_before"))
    s.add_argument("--min-time-all", type=float, default=1.0)
    s.add_argument("--min-time-any", type=float, default=0.01)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_profile)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
