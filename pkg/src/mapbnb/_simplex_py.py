"""Pure-numpy pivot loops for the bounded-variable simplex engine.

This is the fallback for the compiled module ``mapbnb._simplex_c``; the two
must make identical pivot choices (same entering/leaving rules, same
tie-breaking, same floating-point operations) so that a solve is reproducible
regardless of which kernel is active.

Tableau layout shared with the driver in :mod:`mapbnb.lp`:

* ``T``      -- (m, ncols + 1) float64, C-contiguous.  Columns ``0..ncols-1``
  hold the basis-reduced constraint matrix ``B^-1 [A | I]``; the final column
  holds ``B^-1 b`` and is carried through every pivot.
* ``xB``     -- (m,) values of the basic variables.
* ``z``      -- (ncols + 1,) reduced costs for a maximization objective; the
  final entry accumulates ``-y.b``.
* ``basis``  -- (m,) int64, basic column per row.
* ``stat``   -- (ncols,) int8 status per column (AT_LOWER / AT_UPPER / BASIC).
* ``lo, hi`` -- (ncols,) float64 bounds; a column with ``lo == hi`` is pinned
  and must never be selected to enter.

Anti-cycling: after ``bland_after`` consecutive degenerate steps the loop
switches to Bland's rule for the remainder of the call.
"""

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
INFEASIBLE = 2
ITER_LIMIT = 3

AT_LOWER = 0
AT_UPPER = 1
BASIC = 2

_DEGEN_STEP = 1e-12


def primal_loop(T, xB, z, basis, stat, lo, hi, max_iter, bland_after,
                feas_tol, opt_tol, piv_tol):
    """Primal simplex from a primal-feasible basis.  Returns (code, iters)."""
    m, width = T.shape
    ncols = width - 1
    iters = 0
    degen = 0
    bland = False
    zs = z[:ncols]
    while iters < max_iter:
        at_lo = stat == AT_LOWER
        at_up = stat == AT_UPPER
        movable = hi > lo
        viol = np.where(at_lo & movable, zs, np.where(at_up & movable, -zs, -np.inf))
        if bland:
            cand = viol > opt_tol
            if not cand.any():
                return OPTIMAL, iters
            j = int(np.argmax(cand))
        else:
            j = int(np.argmax(viol))
            if viol[j] <= opt_tol:
                return OPTIMAL, iters
        direction = 1.0 if stat[j] == AT_LOWER else -1.0
        col = T[:, j]
        d = direction * col
        blo = lo[basis]
        bhi = hi[basis]
        t = np.full(m, np.inf)
        pos = d > piv_tol
        neg = d < -piv_tol
        t[pos] = (xB[pos] - blo[pos]) / d[pos]
        t[neg] = (xB[neg] - bhi[neg]) / d[neg]
        np.maximum(t, 0.0, out=t)
        tmin = t.min() if m else np.inf
        tflip = hi[j] - lo[j]
        if tflip <= tmin:
            # entering variable hits its opposite bound first: bound flip
            if not np.isfinite(tflip):
                return UNBOUNDED, iters
            xB -= d * tflip
            stat[j] = AT_UPPER if stat[j] == AT_LOWER else AT_LOWER
            step = tflip
        else:
            if not np.isfinite(tmin):
                return UNBOUNDED, iters
            ties = np.nonzero(t == tmin)[0]
            if bland:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(col[ties]))])
            k = basis[r]
            entering_value = (lo[j] if direction > 0 else hi[j]) + direction * tmin
            xB -= d * tmin
            stat[k] = AT_LOWER if d[r] > 0 else AT_UPPER
            xB[r] = entering_value
            basis[r] = j
            stat[j] = BASIC
            _pivot(T, z, r, j)
            step = tmin
        iters += 1
        if step < _DEGEN_STEP:
            degen += 1
            if degen >= bland_after:
                bland = True
        else:
            degen = 0
    return ITER_LIMIT, iters


def dual_loop(T, xB, z, basis, stat, lo, hi, max_iter, bland_after,
              feas_tol, opt_tol, piv_tol):
    """Dual simplex from a dual-feasible basis.  Returns (code, iters)."""
    m, width = T.shape
    if m == 0:
        return OPTIMAL, 0
    ncols = width - 1
    iters = 0
    degen = 0
    bland = False
    zs = z[:ncols]
    while iters < max_iter:
        blo = lo[basis]
        bhi = hi[basis]
        below = blo - xB
        above = xB - bhi
        viol = np.maximum(below, above)
        if bland:
            mask = viol > feas_tol
            if not mask.any():
                return OPTIMAL, iters
            rows = np.nonzero(mask)[0]
            r = int(rows[np.argmin(basis[rows])])
        else:
            r = int(np.argmax(viol))
            if viol[r] <= feas_tol:
                return OPTIMAL, iters
        k = basis[r]
        go_lower = below[r] > above[r]
        target = blo[r] if go_lower else bhi[r]
        row = T[r, :ncols]
        movable = hi > lo
        at_lo = (stat == AT_LOWER) & movable
        at_up = (stat == AT_UPPER) & movable
        if go_lower:
            eligible = (at_lo & (row < -piv_tol)) | (at_up & (row > piv_tol))
            case_sign = 1.0
        else:
            eligible = (at_lo & (row > piv_tol)) | (at_up & (row < -piv_tol))
            case_sign = -1.0
        if not eligible.any():
            return INFEASIBLE, iters
        idx = np.nonzero(eligible)[0]
        ratio = np.maximum(case_sign * zs[idx] / row[idx], 0.0)
        rmin = ratio.min()
        ties = idx[ratio == rmin]
        if bland:
            j = int(ties[0])  # idx ascending, so first tie is smallest index
        else:
            j = int(ties[np.argmax(np.abs(row[ties]))])
        delta = (xB[r] - target) / row[j]
        bound_j = lo[j] if stat[j] == AT_LOWER else hi[j]
        xB -= T[:, j] * delta
        stat[k] = AT_LOWER if go_lower else AT_UPPER
        xB[r] = bound_j + delta
        basis[r] = j
        stat[j] = BASIC
        _pivot(T, z, r, j)
        iters += 1
        if rmin < _DEGEN_STEP:
            degen += 1
            if degen >= bland_after:
                bland = True
        else:
            degen = 0
    return ITER_LIMIT, iters


def _pivot(T, z, r, j):
    piv = T[r, j]
    T[r] /= piv
    f = T[:, j].copy()
    f[r] = 0.0
    # column j becomes exactly e_r: f[i] - f[i] * 1.0 == 0.0 in IEEE
    T -= np.outer(f, T[r])
    zf = z[j]
    if zf != 0.0:
        z -= zf * T[r]
