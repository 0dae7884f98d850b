"""Numpy implementation of the bounded-variable tableau kernel.

Mirrors ``_simplex_core.pyx`` step for step so both backends follow the same
pivot sequence.
"""

import numpy as np

BLAND_AFTER = 20


def pivot(T, d, r, q):
    """Pivot the tableau ``T`` and reduced-cost row ``d`` on element (r, q)."""
    piv = T[r, q]
    T[r, :] /= piv
    col = T[:, q].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r, :])
    T[:, q] = 0.0
    T[r, q] = 1.0
    dq = d[q]
    if dq != 0.0:
        d -= dq * T[r, :]
        d[q] = 0.0


def run_phase(T, d, val, basis, state, lo, up, eligible, max_iter, tol):
    """Primal simplex iterations until optimal.

    state: 0 basic, 1 at lower, 2 at upper. Returns (status, iterations) with
    status 0 optimal, 1 iteration limit, 2 unbounded.
    """
    m, n = T.shape
    degen = 0
    it = 0
    movable = eligible & ((up - lo) > tol)
    while it < max_iter:
        score = np.where(state == 1, -d, np.where(state == 2, d, 0.0))
        score[~movable] = 0.0
        if degen >= BLAND_AFTER:
            cand = np.flatnonzero(score > tol)
            if cand.size == 0:
                return 0, it
            q = int(cand[0])
        else:
            q = int(np.argmax(score))
            if score[q] <= tol:
                return 0, it
        s = 1.0 if state[q] == 1 else -1.0
        a = s * T[:, q]
        vb = val[basis]
        ratio = np.full(m, np.inf)
        pos = a > tol
        neg = a < -tol
        ratio[pos] = (vb[pos] - lo[basis][pos]) / a[pos]
        ub = up[basis]
        ratio[neg] = (ub[neg] - vb[neg]) / (-a[neg])
        np.maximum(ratio, 0.0, out=ratio)
        tmin = ratio.min() if m else np.inf
        tflip = up[q] - lo[q]
        if tflip <= tmin:
            if not np.isfinite(tflip):
                return 2, it
            val[basis] = vb - tflip * a
            if state[q] == 1:
                val[q] = up[q]
                state[q] = 2
            else:
                val[q] = lo[q]
                state[q] = 1
            degen = 0
            it += 1
            continue
        ties = np.flatnonzero(ratio <= tmin + 1e-12)
        if degen >= BLAND_AFTER:
            r = int(ties[np.argmin(basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(a[ties]))])
        t = tmin
        val[basis] = vb - t * a
        val[q] += s * t
        leave = basis[r]
        if a[r] > 0:
            state[leave] = 1
            val[leave] = lo[leave]
        else:
            state[leave] = 2
            val[leave] = up[leave]
        basis[r] = q
        state[q] = 0
        pivot(T, d, r, q)
        degen = degen + 1 if t <= tol else 0
        it += 1
    return 1, it
