"""Exact-rational LP solving and rank computation.

This module certifies results of the float engine: everything runs on
``fractions.Fraction`` with Bland's rule, so it terminates and is exact, but
it is slow and meant for small problems (a few dozen variables).  It is
deliberately independent of :mod:`mapbnb.lp` internals -- a plain dense
two-phase tableau method -- so the two can check each other.
"""

from fractions import Fraction

import numpy as np

from mapbnb.lp import LE, LinearProgram, LpInputError

_ZERO = Fraction(0)
_ONE = Fraction(1)


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))  # binary floats convert exactly


def rank_rational(rows) -> int:
    """Rank of a matrix over the rationals (exact Gaussian elimination)."""
    mat = [[to_fraction(v) for v in row] for row in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    col = 0
    while rank < len(mat) and col < ncols:
        piv = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                piv = r
                break
        if piv is None:
            col += 1
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pv = mat[rank][col]
        mat[rank] = [v / pv for v in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        col += 1
    return rank


class _Tableau:
    """Bounded-variable primal simplex over Fractions, Bland's rule only."""

    def __init__(self, A, b, c, lo, hi):
        self.m = len(A)
        self.ncols = len(c)
        self.T = [row[:] for row in A]
        self.b = b[:]
        self.c = c[:]
        self.lo = lo[:]
        self.hi = hi[:]  # entries may be None (unbounded above)
        self.basis = []
        self.stat = ["L"] * self.ncols
        self.xB = []
        self.z = c[:]
        self.zb = _ZERO

    def movable(self, j):
        return self.hi[j] is None or self.hi[j] > self.lo[j]

    def nb_value(self, j):
        return self.hi[j] if self.stat[j] == "U" else self.lo[j]

    def set_slack_basis(self, slack_offset):
        self.basis = [slack_offset + i for i in range(self.m)]
        for j in self.basis:
            self.stat[j] = "B"
        self.recompute_xB()

    def recompute_xB(self):
        vals = [
            self.nb_value(j) if self.stat[j] != "B" else _ZERO for j in range(self.ncols)
        ]
        self.xB = []
        for r in range(self.m):
            s = self.b[r]
            row = self.T[r]
            for j in range(self.ncols):
                if self.stat[j] != "B" and vals[j] != 0:
                    s -= row[j] * vals[j]
            self.xB.append(s)

    def set_objective(self, c):
        self.c = c[:]
        z = c[:]
        for r in range(self.m):
            k = self.basis[r]
            f = self.c[k]
            if f != 0:
                row = self.T[r]
                for j in range(self.ncols):
                    z[j] -= f * row[j]
        # note: z[basic] == 0 by construction of the reduced tableau
        self.z = z

    def pivot(self, r, j):
        row = self.T[r]
        piv = row[j]
        self.T[r] = [v / piv for v in row]
        self.b[r] = self.b[r] / piv
        for i in range(self.m):
            if i != r:
                f = self.T[i][j]
                if f != 0:
                    ri = self.T[i]
                    rr = self.T[r]
                    self.T[i] = [a - f * bb for a, bb in zip(ri, rr)]
                    self.b[i] = self.b[i] - f * self.b[r]
        f = self.z[j]
        if f != 0:
            rr = self.T[r]
            self.z = [a - f * bb for a, bb in zip(self.z, rr)]
            self.zb = self.zb - f * self.b[r]

    def maximize(self):
        """Run primal simplex to optimality.  Returns 'optimal' or 'unbounded'."""
        while True:
            enter = -1
            for j in range(self.ncols):
                if self.stat[j] == "B" or not self.movable(j):
                    continue
                if self.stat[j] == "L" and self.z[j] > 0:
                    enter = j
                    break
                if self.stat[j] == "U" and self.z[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            j = enter
            direction = 1 if self.stat[j] == "L" else -1
            tflip = None if self.hi[j] is None else self.hi[j] - self.lo[j]
            tmin = tflip
            leave = -1
            for r in range(self.m):
                d = direction * self.T[r][j]
                k = self.basis[r]
                if d > 0:
                    limit = (self.xB[r] - self.lo[k]) / d
                elif d < 0:
                    if self.hi[k] is None:
                        continue
                    limit = (self.xB[r] - self.hi[k]) / d
                else:
                    continue
                if tmin is None or limit < tmin or (
                    limit == tmin and leave >= 0 and self.basis[r] < self.basis[leave]
                ):
                    tmin = limit
                    leave = r
            if tmin is None:
                return "unbounded"
            if leave < 0:
                # entering variable flips to its opposite bound
                for r in range(self.m):
                    self.xB[r] -= direction * self.T[r][j] * tmin
                self.stat[j] = "U" if self.stat[j] == "L" else "L"
                continue
            r = leave
            k = self.basis[r]
            newval = (self.lo[j] if direction > 0 else self.hi[j]) + direction * tmin
            for i in range(self.m):
                self.xB[i] -= direction * self.T[i][j] * tmin
            self.stat[k] = "L" if direction * self.T[r][j] > 0 else "U"
            self.basis[r] = j
            self.stat[j] = "B"
            self.pivot(r, j)
            self.xB[r] = newval

    def point(self):
        x = [self.nb_value(j) if self.stat[j] != "B" else _ZERO for j in range(self.ncols)]
        for r in range(self.m):
            x[self.basis[r]] = self.xB[r]
        return x


def solve_rational(lp: LinearProgram, fixings=None):
    """Exact vertex solve of an LP.  Returns (status, point, value).

    status is one of 'optimal', 'infeasible', 'unbounded'; point is a list of
    Fractions over the structural variables and value an exact Fraction.
    """
    n = lp.num_vars
    m = lp.num_rows
    lo = [to_fraction(lp.bounds[j, 0]) for j in range(n)]
    hi = [to_fraction(lp.bounds[j, 1]) for j in range(n)]
    if fixings:
        for i, v in fixings.items():
            i = int(i)
            if not 0 <= i < n:
                raise LpInputError(f"fixing index {i} out of range")
            fv = to_fraction(v)
            if fv < lo[i] or fv > hi[i]:
                return "infeasible", None, None
            lo[i] = fv
            hi[i] = fv
    A = [[to_fraction(lp.A[r, j]) for j in range(n)] for r in range(m)]
    b = [to_fraction(lp.rhs[r]) for r in range(m)]
    # slacks: [0, inf) for <=, pinned [0, 0] for ==
    for r in range(m):
        srow = [_ZERO] * m
        srow[r] = _ONE
        A[r] = A[r] + srow
    lo += [_ZERO] * m
    hi += [None if lp.senses[r] == LE else _ZERO for r in range(m)]
    c = [to_fraction(lp.objective[j]) for j in range(n)] + [_ZERO] * m

    ncols = n + m
    tab = _Tableau(A, b, [_ZERO] * ncols, lo, hi)
    tab.set_slack_basis(n)

    # phase 1: absorb rows whose natural slack value violates its bounds.
    # The artificial enters with a +1 column so basic columns stay an identity
    # block; rows violated from below are sign-flipped to make that possible.
    art = []
    for r in range(m):
        s = tab.xB[r]
        k = tab.basis[r]
        slo = tab.lo[k]
        shi = tab.hi[k]
        if s < slo or (shi is not None and s > shi):
            below = s < slo
            if below:
                tab.T[r] = [-v for v in tab.T[r]]
                tab.b[r] = -tab.b[r]
            col = tab.ncols
            for i in range(m):
                tab.T[i].append(_ONE if i == r else _ZERO)
            tab.lo.append(_ZERO)
            tab.hi.append(None)
            tab.c.append(_ZERO)
            tab.z.append(_ZERO)
            tab.stat[k] = "L" if below else "U"
            tab.stat.append("B")
            tab.basis[r] = col
            tab.ncols += 1
            art.append(col)
    if art:
        tab.recompute_xB()
        phase1 = [_ZERO] * tab.ncols
        for col in art:
            phase1[col] = -_ONE
        tab.set_objective(phase1)
        status = tab.maximize()
        if status != "optimal":
            raise RuntimeError("phase-1 objective cannot be unbounded")
        infeas = sum((tab.point()[col] for col in art), _ZERO)
        if infeas != 0:
            return "infeasible", None, None
        for col in art:  # pin artificials so they never re-enter
            tab.hi[col] = _ZERO
    tab.set_objective(c + [_ZERO] * len(art))
    status = tab.maximize()
    if status != "optimal":
        return "unbounded", None, None
    x = tab.point()[:n]
    value = sum((to_fraction(lp.objective[j]) * x[j] for j in range(n)), _ZERO)
    return "optimal", x, value
