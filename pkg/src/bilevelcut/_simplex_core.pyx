# cython: language_level=3
"""Compiled bounded-variable tableau kernel (same algorithm as _simplex_py)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()

cdef long BLAND_AFTER = 20


cpdef void pivot(double[:, ::1] T, double[::1] d, Py_ssize_t r, Py_ssize_t q):
    cdef Py_ssize_t m = T.shape[0], n = T.shape[1], i, j
    cdef double piv = T[r, q], f, dq
    for j in range(n):
        T[r, j] /= piv
    for i in range(m):
        if i == r:
            continue
        f = T[i, q]
        if f != 0.0:
            for j in range(n):
                T[i, j] -= f * T[r, j]
            T[i, q] = 0.0
    T[r, q] = 1.0
    dq = d[q]
    if dq != 0.0:
        for j in range(n):
            d[j] -= dq * T[r, j]
        d[q] = 0.0


def run_phase(double[:, ::1] T, double[::1] d, double[::1] val,
              long[::1] basis, long[::1] state, double[::1] lo, double[::1] up,
              cnp.npy_bool[::1] eligible, long max_iter, double tol):
    cdef Py_ssize_t m = T.shape[0], n = T.shape[1]
    cdef Py_ssize_t i, j, q, r, leave
    cdef long it = 0, degen = 0
    cdef double best, sc, s, a, rat, tmin, tflip, t, besta, bi
    cdef bint bland
    while it < max_iter:
        bland = degen >= BLAND_AFTER
        q = -1
        best = tol
        for j in range(n):
            if not eligible[j] or state[j] == 0 or up[j] - lo[j] <= tol:
                continue
            sc = -d[j] if state[j] == 1 else d[j]
            if sc > best:
                q = j
                best = sc
                if bland:
                    break
        if q < 0:
            return 0, it
        s = 1.0 if state[q] == 1 else -1.0
        tmin = INFINITY
        for i in range(m):
            a = s * T[i, q]
            if a > tol:
                rat = (val[basis[i]] - lo[basis[i]]) / a
            elif a < -tol:
                rat = (up[basis[i]] - val[basis[i]]) / (-a)
            else:
                continue
            if rat < 0.0:
                rat = 0.0
            if rat < tmin:
                tmin = rat
        tflip = up[q] - lo[q]
        if tflip <= tmin:
            if tflip == INFINITY:
                return 2, it
            for i in range(m):
                val[basis[i]] -= tflip * s * T[i, q]
            if state[q] == 1:
                val[q] = up[q]
                state[q] = 2
            else:
                val[q] = lo[q]
                state[q] = 1
            degen = 0
            it += 1
            continue
        r = -1
        besta = 0.0
        for i in range(m):
            a = s * T[i, q]
            if a > tol:
                rat = (val[basis[i]] - lo[basis[i]]) / a
            elif a < -tol:
                rat = (up[basis[i]] - val[basis[i]]) / (-a)
            else:
                continue
            if rat < 0.0:
                rat = 0.0
            if rat <= tmin + 1e-12:
                if bland:
                    if r < 0 or basis[i] < basis[r]:
                        r = i
                elif fabs(a) > besta:
                    besta = fabs(a)
                    r = i
        t = tmin
        for i in range(m):
            val[basis[i]] -= t * s * T[i, q]
        val[q] += s * t
        leave = basis[r]
        if s * T[r, q] > 0:
            state[leave] = 1
            val[leave] = lo[leave]
        else:
            state[leave] = 2
            val[leave] = up[leave]
        basis[r] = q
        state[q] = 0
        pivot(T, d, r, q)
        if t <= tol:
            degen += 1
        else:
            degen = 0
        it += 1
    return 1, it
