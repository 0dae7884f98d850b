"""JSON reading and writing of canonical instances."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..model import InterdictionData, MiblpInstance

FORMAT = "bilevelcut/1"

_VECTORS = ("c", "d1", "d2", "b1", "b2", "lx", "ux", "ly", "uy")
_MATRICES = ("A1", "G1", "A2", "G2")


class SchemaError(ValueError):
    pass


def to_dict(inst: MiblpInstance) -> dict:
    d = {"format": FORMAT, "name": inst.name, "n1": inst.n1, "n2": inst.n2, "r1": inst.r1, "r2": inst.r2}
    for k in _VECTORS:
        d[k] = getattr(inst, k).tolist()
    for k in _MATRICES:
        d[k] = getattr(inst, k).tolist()
    d["x_names"] = list(inst.x_names)
    d["y_names"] = list(inst.y_names)
    it = inst.interdiction
    d["interdiction"] = None if it is None else {k: np.asarray(getattr(it, k)).tolist() for k in ("A", "b", "G", "g", "d", "u")}
    return d


def _num_list(v, path, depth):
    if not isinstance(v, list):
        raise SchemaError(f"{path}: expected a list")
    for i, e in enumerate(v):
        if depth > 1:
            _num_list(e, f"{path}[{i}]", depth - 1)
        elif isinstance(e, bool) or not isinstance(e, (int, float)):
            raise SchemaError(f"{path}[{i}]: expected a number, got {type(e).__name__}")
    return v


def from_dict(d: dict) -> MiblpInstance:
    if not isinstance(d, dict):
        raise SchemaError("$: expected an object")
    if d.get("format") != FORMAT:
        raise SchemaError(f"$.format: expected {FORMAT!r}")
    for k in ("n1", "n2", "r1", "r2"):
        if not isinstance(d.get(k), int) or isinstance(d.get(k), bool):
            raise SchemaError(f"$.{k}: expected an integer")
    kw = {k: d[k] for k in ("n1", "n2", "r1", "r2")}
    for k in _VECTORS:
        if k not in d:
            raise SchemaError(f"$.{k}: missing")
        kw[k] = np.array(_num_list(d[k], f"$.{k}", 1), float)
    for k in _MATRICES:
        if k not in d:
            raise SchemaError(f"$.{k}: missing")
        rows = _num_list(d[k], f"$.{k}", 2)
        ncol = d["n1"] if k.startswith("A") else d["n2"]
        kw[k] = np.array(rows, float).reshape(len(rows), ncol) if rows else np.zeros((0, ncol))
    it = d.get("interdiction")
    if it is not None:
        if not isinstance(it, dict):
            raise SchemaError("$.interdiction: expected an object or null")
        parts = {}
        for k, depth in (("A", 2), ("b", 1), ("G", 2), ("g", 1), ("d", 1), ("u", 1)):
            if k not in it:
                raise SchemaError(f"$.interdiction.{k}: missing")
            parts[k] = np.array(_num_list(it[k], f"$.interdiction.{k}", depth), float)
        kw["interdiction"] = InterdictionData(**parts)
    kw["name"] = d.get("name", "instance")
    kw["x_names"] = tuple(d.get("x_names") or ())
    kw["y_names"] = tuple(d.get("y_names") or ())
    try:
        return MiblpInstance(**kw)
    except ValueError as e:
        raise SchemaError(f"$: {e}") from e


def write_json(inst: MiblpInstance, path):
    Path(path).write_text(json.dumps(to_dict(inst), indent=1) + "\n", encoding="utf-8")


def parse_json(path) -> MiblpInstance:
    return from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
