# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pivot loops for the bounded-variable simplex engine.

Semantics, pivot rules, and floating-point operation order are kept
bit-identical to the numpy fallback in ``mapbnb._simplex_py`` (see its
docstring for the tableau layout); the extension is built with
``-ffp-contract=off`` so no fused multiply-adds sneak in.
"""

from libc.math cimport INFINITY, fabs, isfinite

cimport numpy as cnp

OPTIMAL = 0
UNBOUNDED = 1
INFEASIBLE = 2
ITER_LIMIT = 3

AT_LOWER = 0
AT_UPPER = 1
BASIC = 2

cdef enum:
    _AT_LOWER = 0
    _AT_UPPER = 1
    _BASIC = 2

cdef double DEGEN_STEP = 1e-12


def primal_loop(double[:, ::1] T, double[::1] xB, double[::1] z,
                cnp.int64_t[::1] basis, cnp.int8_t[::1] stat,
                double[::1] lo, double[::1] hi,
                long max_iter, long bland_after,
                double feas_tol, double opt_tol, double piv_tol):
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t width = T.shape[1]
    cdef Py_ssize_t ncols = width - 1
    cdef long iters = 0
    cdef long degen = 0
    cdef bint bland = False
    cdef Py_ssize_t i, j, r, c, leave
    cdef cnp.int64_t k
    cdef double best, v, direction, dj, t, tmin, tflip, step, piv, f, zf
    cdef double entering_value

    while iters < max_iter:
        j = -1
        if bland:
            for i in range(ncols):
                if stat[i] == _BASIC or hi[i] <= lo[i]:
                    continue
                v = z[i] if stat[i] == _AT_LOWER else -z[i]
                if v > opt_tol:
                    j = i
                    break
        else:
            best = opt_tol
            for i in range(ncols):
                if stat[i] == _BASIC or hi[i] <= lo[i]:
                    continue
                v = z[i] if stat[i] == _AT_LOWER else -z[i]
                if v > best:
                    best = v
                    j = i
        if j < 0:
            return OPTIMAL, iters
        direction = 1.0 if stat[j] == _AT_LOWER else -1.0

        tmin = INFINITY
        for r in range(m):
            dj = direction * T[r, j]
            k = basis[r]
            if dj > piv_tol:
                t = (xB[r] - lo[k]) / dj
            elif dj < -piv_tol:
                t = (xB[r] - hi[k]) / dj
            else:
                continue
            if t < 0.0:
                t = 0.0
            if t < tmin:
                tmin = t
        tflip = hi[j] - lo[j]
        if tflip <= tmin:
            if not isfinite(tflip):
                return UNBOUNDED, iters
            for r in range(m):
                xB[r] -= (direction * T[r, j]) * tflip
            stat[j] = _AT_UPPER if stat[j] == _AT_LOWER else _AT_LOWER
            step = tflip
        else:
            if not isfinite(tmin):
                return UNBOUNDED, iters
            leave = -1
            best = -1.0
            for r in range(m):
                dj = direction * T[r, j]
                k = basis[r]
                if dj > piv_tol:
                    t = (xB[r] - lo[k]) / dj
                elif dj < -piv_tol:
                    t = (xB[r] - hi[k]) / dj
                else:
                    continue
                if t < 0.0:
                    t = 0.0
                if t == tmin:
                    if bland:
                        if leave < 0 or basis[r] < basis[leave]:
                            leave = r
                    else:
                        v = fabs(T[r, j])
                        if v > best:
                            best = v
                            leave = r
            entering_value = (lo[j] if direction > 0.0 else hi[j]) + direction * tmin
            for r in range(m):
                xB[r] -= (direction * T[r, j]) * tmin
            k = basis[leave]
            stat[k] = _AT_LOWER if direction * T[leave, j] > 0.0 else _AT_UPPER
            xB[leave] = entering_value
            basis[leave] = j
            stat[j] = _BASIC
            piv = T[leave, j]
            for c in range(width):
                T[leave, c] /= piv
            for i in range(m):
                if i != leave:
                    f = T[i, j]
                    if f != 0.0:
                        for c in range(width):
                            T[i, c] -= f * T[leave, c]
            zf = z[j]
            if zf != 0.0:
                for c in range(width):
                    z[c] -= zf * T[leave, c]
            step = tmin
        iters += 1
        if step < DEGEN_STEP:
            degen += 1
            if degen >= bland_after:
                bland = True
        else:
            degen = 0
    return ITER_LIMIT, iters


def dual_loop(double[:, ::1] T, double[::1] xB, double[::1] z,
              cnp.int64_t[::1] basis, cnp.int8_t[::1] stat,
              double[::1] lo, double[::1] hi,
              long max_iter, long bland_after,
              double feas_tol, double opt_tol, double piv_tol):
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t width = T.shape[1]
    cdef Py_ssize_t ncols = width - 1
    cdef long iters = 0
    cdef long degen = 0
    cdef bint bland = False
    cdef Py_ssize_t i, j, r, c, jj
    cdef cnp.int64_t k
    cdef bint go_lower, ok
    cdef double best, v, below, above, viol, target, case_sign, rmin, t, a
    cdef double delta, bound_j, piv, f, zf

    if m == 0:
        return OPTIMAL, 0
    while iters < max_iter:
        r = -1
        if bland:
            for i in range(m):
                k = basis[i]
                below = lo[k] - xB[i]
                above = xB[i] - hi[k]
                v = below if below > above else above
                if v > feas_tol:
                    if r < 0 or basis[i] < basis[r]:
                        r = i
        else:
            best = feas_tol
            for i in range(m):
                k = basis[i]
                below = lo[k] - xB[i]
                above = xB[i] - hi[k]
                v = below if below > above else above
                if v > best:
                    best = v
                    r = i
        if r < 0:
            return OPTIMAL, iters
        k = basis[r]
        below = lo[k] - xB[r]
        above = xB[r] - hi[k]
        go_lower = below > above
        target = lo[k] if go_lower else hi[k]
        case_sign = 1.0 if go_lower else -1.0

        # dual ratio test pass 1: smallest |z / pivot| over eligible columns
        rmin = INFINITY
        for jj in range(ncols):
            if stat[jj] == _BASIC or hi[jj] <= lo[jj]:
                continue
            a = T[r, jj]
            if go_lower:
                ok = (stat[jj] == _AT_LOWER and a < -piv_tol) or (
                    stat[jj] == _AT_UPPER and a > piv_tol)
            else:
                ok = (stat[jj] == _AT_LOWER and a > piv_tol) or (
                    stat[jj] == _AT_UPPER and a < -piv_tol)
            if not ok:
                continue
            t = (case_sign * z[jj]) / a
            if t < 0.0:
                t = 0.0
            if t < rmin:
                rmin = t
        if not isfinite(rmin):
            return INFEASIBLE, iters
        # pass 2: tie-break
        j = -1
        best = -1.0
        for jj in range(ncols):
            if stat[jj] == _BASIC or hi[jj] <= lo[jj]:
                continue
            a = T[r, jj]
            if go_lower:
                ok = (stat[jj] == _AT_LOWER and a < -piv_tol) or (
                    stat[jj] == _AT_UPPER and a > piv_tol)
            else:
                ok = (stat[jj] == _AT_LOWER and a > piv_tol) or (
                    stat[jj] == _AT_UPPER and a < -piv_tol)
            if not ok:
                continue
            t = (case_sign * z[jj]) / a
            if t < 0.0:
                t = 0.0
            if t == rmin:
                if bland:
                    j = jj
                    break
                v = fabs(a)
                if v > best:
                    best = v
                    j = jj
        delta = (xB[r] - target) / T[r, j]
        bound_j = lo[j] if stat[j] == _AT_LOWER else hi[j]
        for i in range(m):
            xB[i] -= T[i, j] * delta
        stat[k] = _AT_LOWER if go_lower else _AT_UPPER
        xB[r] = bound_j + delta
        basis[r] = j
        stat[j] = _BASIC
        piv = T[r, j]
        for c in range(width):
            T[r, c] /= piv
        for i in range(m):
            if i != r:
                f = T[i, j]
                if f != 0.0:
                    for c in range(width):
                        T[i, c] -= f * T[r, c]
        zf = z[j]
        if zf != 0.0:
            for c in range(width):
                z[c] -= zf * T[r, c]
        iters += 1
        if rmin < DEGEN_STEP:
            degen += 1
            if degen >= bland_after:
                bland = True
        else:
            degen = 0
    return ITER_LIMIT, iters
