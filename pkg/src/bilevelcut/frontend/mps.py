"""MPS plus AUX reader/writer.

The MPS file holds the single-level data; the AUX file says which columns
and rows belong to the follower::

    N <count of follower columns>
    M <count of follower rows>
    LC <column index>      (one per follower column)
    LR <row index>         (one per follower row)
    LO <coefficient>       (follower objective, in LC order)
    OS <1|-1>              (follower sense, -1 = maximize)

Indices are zero-based unless ``one_based`` is set.
"""

from __future__ import annotations

import math
import warnings
from pathlib import Path

import numpy as np

from ..model import MiblpInstance, ModelError, RawInstance, canonicalize, recognize_interdiction


class MpsError(ValueError):
    pass


SECTIONS = {"NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA", "OBJSENSE", "OBJSENSE MAX", "OBJSENSE MIN"}


def _fixed_fields(line):
    # fixed MPS field columns: 2-3, 5-12, 15-22, 25-36, 40-47, 50-61
    spans = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)]
    out = [line[a:b].strip() for a, b in spans]
    return [f for f in out if f]


def read_mps(path, fixed=False):
    """Parse an MPS file into a plain dictionary of dense data."""
    name = ""
    rows, row_type = [], {}
    obj_row = None
    cols, col_index = [], {}
    coef = {}
    integer = set()
    rhs, ranges = {}, {}
    lo, up = {}, {}
    sense = "min"
    section = None
    in_int = False
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0].upper()
            if section == "NAME":
                name = head[1] if len(head) > 1 else ""
            elif section == "OBJSENSE" and len(head) > 1:
                sense = "max" if head[1].upper().startswith("MAX") else "min"
            elif section == "ENDATA":
                break
            elif section not in SECTIONS:
                raise MpsError(f"unknown section {section}")
            continue
        toks = raw.split()
        if section == "COLUMNS" and len(toks) >= 3 and toks[1].strip("'\"").upper() == "MARKER":
            in_int = "INTORG" in toks[2].upper()
            continue
        f = _fixed_fields(raw) if fixed else toks
        if section == "OBJSENSE":
            sense = "max" if f[0].upper().startswith("MAX") else "min"
        elif section == "ROWS":
            t, r = f[0].upper(), f[1]
            if t == "N":
                if obj_row is None:
                    obj_row = r
                continue
            if t not in ("L", "G", "E"):
                raise MpsError(f"row {r}: unknown type {t}")
            row_type[r] = t
            rows.append(r)
        elif section == "COLUMNS":
            c = f[0]
            if c not in col_index:
                col_index[c] = len(cols)
                cols.append(c)
                if in_int:
                    integer.add(c)
            for r, v in zip(f[1::2], f[2::2]):
                if r != obj_row and r not in row_type:
                    raise MpsError(f"column {c}: unknown row {r}")
                coef[(r, c)] = coef.get((r, c), 0.0) + float(v)
        elif section in ("RHS", "RANGES"):
            pairs = f[1:] if len(f) % 2 == 1 else f
            target = rhs if section == "RHS" else ranges
            for r, v in zip(pairs[0::2], pairs[1::2]):
                target[r] = float(v)
        elif section == "BOUNDS":
            t = f[0].upper()
            valueless = t in ("FR", "MI", "PL", "BV")
            # the bound-set name is optional
            named = len(f) == (3 if valueless else 4)
            c = f[2] if named else f[1]
            v = None if valueless else float(f[-1])
            if c not in col_index:
                raise MpsError(f"bound on unknown column {c}")
            if t == "UP":
                up[c] = v
            elif t == "LO":
                lo[c] = v
            elif t == "FX":
                lo[c] = up[c] = v
            elif t == "BV":
                lo[c], up[c] = 0.0, 1.0
                integer.add(c)
            elif t == "LI":
                lo[c] = v
                integer.add(c)
            elif t == "UI":
                up[c] = v
                integer.add(c)
            elif t == "MI":
                lo[c] = -math.inf
            elif t in ("PL", "FR"):
                up[c] = math.inf
                if t == "FR":
                    lo[c] = -math.inf
            else:
                raise MpsError(f"unknown bound type {t}")
    n = len(cols)
    A = np.zeros((len(rows), n))
    ridx = {r: i for i, r in enumerate(rows)}
    obj = np.zeros(n)
    for (r, c), v in coef.items():
        if r == obj_row:
            obj[col_index[c]] = v
        else:
            A[ridx[r], col_index[c]] = v
    return {
        "name": name, "rows": rows, "types": [row_type[r] for r in rows], "cols": cols,
        "A": A, "b": np.array([rhs.get(r, 0.0) for r in rows]),
        "ranges": {ridx[r]: v for r, v in ranges.items() if r in ridx},
        "obj": obj, "sense": sense,
        "integer": np.array([c in integer for c in cols], dtype=bool),
        "lo": np.array([lo.get(c, 0.0) for c in cols]),
        "up": np.array([up.get(c, math.inf) for c in cols]),
    }


def read_aux(path, ncols, nrows, one_based=False):
    N = M = None
    LC, LR, LO = [], [], []
    OS = None
    shift = 1 if one_based else 0
    for k, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        f = line.split()
        if not f or f[0].startswith("#"):
            continue
        key = f[0].upper()
        if len(f) < 2:
            raise MpsError(f"aux line {k}: missing value")
        if key == "N":
            N = int(f[1])
        elif key == "M":
            M = int(f[1])
        elif key == "LC":
            LC.append(int(f[1]) - shift)
        elif key == "LR":
            LR.append(int(f[1]) - shift)
        elif key == "LO":
            LO.append(float(f[1]))
        elif key == "OS":
            OS = int(float(f[1]))
        else:
            raise MpsError(f"aux line {k}: unknown key {f[0]}")
    if OS is None:
        warnings.warn("aux file has no OS line; assuming a minimizing follower")
        OS = 1
    if OS not in (1, -1):
        raise MpsError("OS must be 1 or -1")
    for i in LC:
        if not 0 <= i < ncols:
            raise MpsError(f"LC index {i} out of range (0..{ncols - 1})")
    for i in LR:
        if not 0 <= i < nrows:
            raise MpsError(f"LR index {i} out of range (0..{nrows - 1})")
    if N is not None and N != len(LC):
        raise MpsError(f"N says {N} follower columns but {len(LC)} LC lines given")
    if M is not None and M != len(LR):
        raise MpsError(f"M says {M} follower rows but {len(LR)} LR lines given")
    if len(LO) != len(LC):
        raise MpsError(f"{len(LO)} LO coefficients for {len(LC)} follower columns")
    if len(set(LC)) != len(LC) or len(set(LR)) != len(LR):
        raise MpsError("duplicate LC or LR index")
    return {"LC": LC, "LR": LR, "LO": LO, "OS": OS}


def _expand_ranges(A, b, types, ranges):
    """Rows and senses after turning ranged rows into pairs."""
    rows, rhs, senses = [], [], []
    sym = {"G": ">=", "L": "<=", "E": "="}
    for i, t in enumerate(types):
        R = ranges.get(i)
        if R is None:
            rows.append(A[i]); rhs.append(b[i]); senses.append(sym[t])
            continue
        if t == "G":
            lo, hi = b[i], b[i] + abs(R)
        elif t == "L":
            lo, hi = b[i] - abs(R), b[i]
        else:
            lo, hi = (b[i], b[i] + R) if R >= 0 else (b[i] + R, b[i])
        rows += [A[i], A[i]]
        rhs += [lo, hi]
        senses += [">=", "<="]
    return rows, rhs, senses


def parse_mps_aux(mps_path, aux_path, one_based=False, fixed=False) -> MiblpInstance:
    m = read_mps(mps_path, fixed=fixed)
    aux = read_aux(aux_path, len(m["cols"]), len(m["rows"]), one_based)
    n = len(m["cols"])
    yc = aux["LC"]
    xc = [j for j in range(n) if j not in set(yc)]
    lr = set(aux["LR"])
    lead = [i for i in range(len(m["rows"])) if i not in lr]
    foll = list(aux["LR"])
    A = m["A"]

    def block(idx):
        rr = {k: m["ranges"][i] for k, i in enumerate(idx) if i in m["ranges"]}
        return _expand_ranges(A[idx], m["b"][idx], [m["types"][i] for i in idx], rr)

    r1, b1, s1 = block(lead)
    r2, b2, s2 = block(foll)
    r1 = np.array(r1).reshape(-1, n)
    r2 = np.array(r2).reshape(-1, n)
    if not np.all(np.isfinite(m["up"])) or not np.all(np.isfinite(m["lo"])):
        raise ModelError("every column needs finite bounds")
    raw = RawInstance(
        c=m["obj"][xc], d1=m["obj"][yc], d2=aux["LO"],
        A1=r1[:, xc], G1=r1[:, yc], b1=b1, senses1=s1,
        A2=r2[:, xc], G2=r2[:, yc], b2=b2, senses2=s2,
        lx=m["lo"][xc], ux=m["up"][xc], ly=m["lo"][yc], uy=m["up"][yc],
        x_integer=m["integer"][xc], y_integer=m["integer"][yc],
        leader_sense=m["sense"], follower_sense="max" if aux["OS"] == -1 else "min",
        name=m["name"] or Path(mps_path).stem,
        x_names=[m["cols"][j] for j in xc], y_names=[m["cols"][j] for j in yc],
    )
    return recognize_interdiction(canonicalize(raw))


def _fmt(v):
    return repr(float(v)) if v != int(v) else str(int(v))


def write_mps_aux(inst: MiblpInstance, mps_path, aux_path):
    """Write a canonical instance as free MPS (all rows ``G``) plus AUX."""
    names = [f"C{j}" for j in range(inst.n)]
    M, rhs = inst.all_rows()
    rnames = [f"R{i}" for i in range(len(rhs))]
    obj = np.concatenate([inst.c, inst.d1])
    mask = inst.integer_mask()
    out = [f"NAME {inst.name}", "ROWS", " N OBJ"] + [f" G {r}" for r in rnames] + ["COLUMNS"]
    marker = False
    for j, cn in enumerate(names):
        if mask[j] and not marker:
            out.append(" MARKER 'MARKER' 'INTORG'")
            marker = True
        if not mask[j] and marker:
            out.append(" MARKER 'MARKER' 'INTEND'")
            marker = False
        out.append(f" {cn} OBJ {_fmt(obj[j])}")
        for i in np.flatnonzero(M[:, j]):
            out.append(f" {cn} {rnames[i]} {_fmt(M[i, j])}")
    if marker:
        out.append(" MARKER 'MARKER' 'INTEND'")
    out.append("RHS")
    out += [f" RHS {r} {_fmt(v)}" for r, v in zip(rnames, rhs) if v != 0]
    out.append("BOUNDS")
    lo, up = inst.lower(), inst.upper()
    for j, cn in enumerate(names):
        out.append(f" LO BND {cn} {_fmt(lo[j])}")
        out.append(f" UP BND {cn} {_fmt(up[j])}")
    out.append("ENDATA")
    Path(mps_path).write_text("\n".join(out) + "\n", encoding="utf-8")
    aux = [f"N {inst.n2}", f"M {inst.m2}"]
    aux += [f"LC {inst.n1 + j}" for j in range(inst.n2)]
    aux += [f"LR {inst.m1 + i}" for i in range(inst.m2)]
    aux += [f"LO {_fmt(v)}" for v in inst.d2]
    aux.append("OS 1")
    Path(aux_path).write_text("\n".join(aux) + "\n", encoding="utf-8")
