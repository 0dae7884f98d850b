"""Compare the compiled and pure-Python simplex kernels.

    python3 benchmarks/bench_kernels.py [--sizes 20,40,80] [--reps 20]
"""

import argparse
import time

import numpy as np

from bilevelcut import _kernels, _simplex_py
from bilevelcut import simplex as sx

try:
    from bilevelcut import _simplex_core
except ImportError:
    _simplex_core = None


def random_lp(m, n, rng):
    A = rng.integers(-9, 10, size=(m, n)).astype(float)
    x0 = rng.uniform(0, 5, n)
    b = A @ x0 - rng.uniform(0, 3, m)
    return sx.LpProblem(rng.integers(-9, 10, n).astype(float), A, b, np.zeros(n), np.full(n, 10.0))


def timed(kernel, problems):
    _kernels.run_phase = kernel.run_phase
    _kernels.pivot = kernel.pivot
    t = time.perf_counter()
    objs = [sx.solve_lp(p).objective for p in problems]
    return time.perf_counter() - t, objs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="10,20,40,80")
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    if _simplex_core is None:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    saved = _kernels.run_phase, _kernels.pivot
    rng = np.random.default_rng(a.seed)
    print(f"{'m x n':>10} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for s in (int(v) for v in a.sizes.split(",")):
        probs = [random_lp(s, s, rng) for _ in range(a.reps)]
        tp, op = timed(_simplex_py, probs)
        tc, oc = timed(_simplex_core, probs)
        assert np.allclose(op, oc, equal_nan=True), "backends disagree"
        print(f"{s:>4} x {s:<4} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")
    _kernels.run_phase, _kernels.pivot = saved


if __name__ == "__main__":
    main()
