"""Benchmark harness: run a manifest of instances x configs, write CSV."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..model import MiblpInstance
from ..search import SolverConfig, bundle, default_config, solve
from .generators import generate


@dataclass
class BenchRecord:
    instance: str
    config: str
    status: str
    cpu: float
    nodes: int
    gap: float
    root_gap_before: float
    root_gap_after: float
    value: float = math.inf
    bound: float = -math.inf
    stats: dict = field(default_factory=dict)

    def row(self):
        d = asdict(self)
        d["stats"] = json.dumps(self.stats, sort_keys=True)
        return d


def rel_gap(incumbent, bound):
    if not (math.isfinite(incumbent) and math.isfinite(bound)):
        return math.inf
    return max(0.0, (incumbent - bound) / max(1.0, abs(incumbent)))


def config_from_spec(spec, inst=None) -> SolverConfig:
    """Build a config from a manifest entry: either ``{"bundle": ...}`` or
    explicit ``cuts``/``ic_strategy``/``branching`` keys."""
    spec = dict(spec)
    name = spec.pop("name", None)
    kind = spec.pop("bundle", None)
    if kind == "default":
        cfg = default_config(inst, **spec)
    elif kind is not None:
        cfg = bundle(kind, **spec)
    else:
        cfg = SolverConfig(**spec)
    if name:
        cfg.name = name
    return cfg


def load_instance(entry, base=Path(".")) -> tuple[str, MiblpInstance]:
    from .cli import read_instance  # local import keeps cli optional here

    if isinstance(entry, str):
        p = base / entry
        return p.stem, read_instance(p)
    if "family" in entry:
        size = entry.get("size", {})
        inst = generate(entry["family"], seed=entry.get("seed", 0), **size)
        return entry.get("id", f"{entry['family']}_{entry.get('seed', 0)}"), inst
    p = base / entry["path"]
    return entry.get("id", p.stem), read_instance(p, aux=entry.get("aux") and base / entry["aux"])


def run_one(iid, inst, cfg_spec, time_limit) -> BenchRecord:
    cfg = config_from_spec(cfg_spec, inst)
    if time_limit is not None:
        cfg.time_limit = float(time_limit)
    name = cfg.name or cfg_spec.get("bundle", "config")
    try:
        res = solve(inst, cfg)
    except ValueError as e:
        return BenchRecord(iid, name, "error", 0.0, 0, math.inf, math.inf, math.inf, stats={"error": str(e)})
    st = res.stats
    return BenchRecord(
        instance=iid, config=name, status=res.status, cpu=st.times["total"], nodes=st.nodes,
        gap=0.0 if res.status in ("optimal", "infeasible") else res.gap,
        root_gap_before=rel_gap(res.value, st.root_bound_before),
        root_gap_after=rel_gap(res.value, st.root_bound_after),
        value=res.value, bound=res.bound, stats=st.as_dict(),
    )


def _task(args):
    entry, cfg_spec, time_limit, base = args
    iid, inst = load_instance(entry, Path(base))
    return run_one(iid, inst, cfg_spec, time_limit)


def run_manifest(manifest, jobs=1):
    """``manifest`` is a dict (or JSON path) with ``instances``, ``configs``
    and an optional ``time_limit``."""
    base = "."
    if not isinstance(manifest, dict):
        base = str(Path(manifest).parent)
        manifest = json.loads(Path(manifest).read_text(encoding="utf-8"))
    tl = manifest.get("time_limit")
    tasks = [(e, c, tl, base) for e in manifest["instances"] for c in manifest["configs"]]
    if jobs <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_task, tasks))


CSV_FIELDS = [f.name for f in fields(BenchRecord)]


def write_records(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.row())


def read_records(path):
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(BenchRecord(
                instance=row["instance"], config=row["config"], status=row["status"],
                cpu=float(row["cpu"]), nodes=int(row["nodes"]), gap=float(row["gap"]),
                root_gap_before=float(row["root_gap_before"]), root_gap_after=float(row["root_gap_after"]),
                value=float(row["value"]), bound=float(row["bound"]),
                stats=json.loads(row["stats"]) if row.get("stats") else {},
            ))
    return out
