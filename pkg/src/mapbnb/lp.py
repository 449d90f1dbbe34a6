"""Bounded-variable LP engine that always returns an extreme-point solution.

Problems are maximizations of ``c.x`` subject to rows ``a.x <= b`` or
``a.x == b`` and box bounds ``0 <= lo <= x <= hi <= 1``.  Cold solves run the
primal simplex when the all-lower-bound point is feasible (which it is for
every pairwise-consistency polytope built by :mod:`mapbnb.model`); otherwise
nonbasic variables are parked on the bound matching their reduced-cost sign
and the dual simplex takes over.  Warm restarts after variable pinning or row
addition reuse the factored tableau and run the dual simplex only.

Variable fixing is implemented by pinching bounds to ``[v, v]`` rather than by
equality rows, which preserves the problem dimension across restarts.

The pivot loops live in a compiled extension (``mapbnb._simplex_c``) with a
pure-numpy fallback (``mapbnb._simplex_py``); both make bit-identical pivot
decisions.  Set ``MAPBNB_KERNEL=python`` or ``=compiled`` to force one.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional

import numpy as np

from mapbnb import _simplex_py

try:
    from mapbnb import _simplex_c
except ImportError:  # extension not built; the fallback is fully equivalent
    _simplex_c = None


def _default_kernel():
    forced = os.environ.get("MAPBNB_KERNEL", "").lower()
    if forced in ("py", "python"):
        return _simplex_py
    if forced in ("c", "compiled"):
        if _simplex_c is None:
            raise ImportError("MAPBNB_KERNEL=compiled but mapbnb._simplex_c is not built")
        return _simplex_c
    return _simplex_c if _simplex_c is not None else _simplex_py


_KERNEL = _default_kernel()
KERNEL_NAME = "compiled" if _KERNEL is _simplex_c else "python"

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIV_TOL = 1e-9
BLAND_AFTER = 50

LE = 0
EQ = 1

_AT_LOWER = _simplex_py.AT_LOWER
_AT_UPPER = _simplex_py.AT_UPPER
_BASIC = _simplex_py.BASIC


class LpInputError(ValueError):
    """Malformed problem data (dimension mismatch, bad bounds, bad sense)."""


class PivotLimitError(RuntimeError):
    """Anti-cycling protection exhausted; indicates an engine bug."""


class StaleBasisError(RuntimeError):
    """A supplied basis does not fit the problem it is being applied to."""


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _parse_sense(sense) -> int:
    if sense in (LE, "<=", "le"):
        return LE
    if sense in (EQ, "=", "==", "eq"):
        return EQ
    raise LpInputError(f"unknown row sense {sense!r}")


class LinearProgram:
    """Immutable LP data: objective, rows, and per-variable box bounds."""

    __slots__ = ("num_vars", "objective", "A", "senses", "rhs", "bounds")

    def __init__(self, num_vars, objective, rows=(), var_bounds=None):
        num_vars = int(num_vars)
        if num_vars < 0:
            raise LpInputError("num_vars must be nonnegative")
        c = np.asarray(objective, dtype=np.float64)
        if c.shape != (num_vars,):
            raise LpInputError(f"objective has shape {c.shape}, expected ({num_vars},)")
        rows = list(rows)
        A = np.zeros((len(rows), num_vars), dtype=np.float64)
        senses = np.zeros(len(rows), dtype=np.int8)
        rhs = np.zeros(len(rows), dtype=np.float64)
        for r, (coeffs, sense, b) in enumerate(rows):
            a = np.asarray(coeffs, dtype=np.float64)
            if a.shape != (num_vars,):
                raise LpInputError(f"row {r} has shape {a.shape}, expected ({num_vars},)")
            A[r] = a
            senses[r] = _parse_sense(sense)
            rhs[r] = float(b)
        if var_bounds is None:
            bounds = np.tile([0.0, 1.0], (num_vars, 1))
        else:
            bounds = np.asarray(var_bounds, dtype=np.float64)
            if bounds.shape != (num_vars, 2):
                raise LpInputError(f"var_bounds has shape {bounds.shape}, expected ({num_vars}, 2)")
            if np.any(bounds[:, 0] < -0.0) or np.any(bounds[:, 1] > 1.0) or np.any(
                bounds[:, 0] > bounds[:, 1]
            ):
                raise LpInputError("var_bounds must satisfy 0 <= lo <= hi <= 1")
        self.num_vars = num_vars
        self.objective = c
        self.A = A
        self.senses = senses
        self.rhs = rhs
        self.bounds = bounds

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def rows(self):
        for r in range(self.num_rows):
            yield self.A[r], int(self.senses[r]), float(self.rhs[r])

    def with_row(self, coeffs, sense, rhs) -> "LinearProgram":
        """Return a copy of this LP with one row appended."""
        a = np.asarray(coeffs, dtype=np.float64)
        if a.shape != (self.num_vars,):
            raise LpInputError(f"row has shape {a.shape}, expected ({self.num_vars},)")
        new_rows = list(self.rows()) + [(a, sense, rhs)]
        return LinearProgram(self.num_vars, self.objective, new_rows, self.bounds)


@dataclass(frozen=True)
class BasisSnapshot:
    """Identifies a vertex by its basic columns and parked nonbasic bounds."""

    columns: tuple
    at_upper: frozenset
    num_vars: int
    num_rows: int


class LpResult:
    """Outcome of one solve; the basis snapshot is materialized lazily."""

    __slots__ = ("status", "point", "value", "dual", "iterations", "used_fallback", "_basis_raw", "_basis")

    def __init__(self, status, point=None, value=None, dual=None, iterations=0,
                 used_fallback=False, basis_raw=None):
        self.status = status
        self.point = point
        self.value = value
        self.dual = dual
        self.iterations = iterations
        self.used_fallback = used_fallback
        self._basis_raw = basis_raw  # (basis array copy, stat array copy, n, m)
        self._basis = None

    @property
    def basis(self) -> Optional[BasisSnapshot]:
        if self._basis is None and self._basis_raw is not None:
            cols, stat, n, m = self._basis_raw
            self._basis = BasisSnapshot(
                columns=tuple(int(c) for c in cols),
                at_upper=frozenset(int(j) for j in np.nonzero(stat == _AT_UPPER)[0]),
                num_vars=n,
                num_rows=m,
            )
        return self._basis

    def _replace_fallback(self) -> "LpResult":
        self.used_fallback = True
        return self


class SimplexSolver:
    """Stateful engine over one constraint matrix.

    A single instance must not be used from multiple threads; distinct
    instances are independent.  Bounds (including pins) may change between
    ``solve`` calls, and rows may be appended; both reuse the current basis.
    """

    def __init__(self, lp: LinearProgram, kernel=None):
        self.lp = lp
        self._kern = kernel if kernel is not None else _KERNEL
        self.n = lp.num_vars
        self.m = lp.num_rows
        self.ncols = self.n + self.m
        if self.m:
            M = np.hstack([lp.A, np.eye(self.m)])
        else:
            M = np.zeros((0, self.n))
        self._M = np.ascontiguousarray(M, dtype=np.float64)
        self._b = lp.rhs.astype(np.float64).copy()
        self._c = np.concatenate([lp.objective, np.zeros(self.m)])
        self._slack_hi = np.where(lp.senses == EQ, 0.0, np.inf).astype(np.float64)
        self.lo = np.empty(self.ncols)
        self.hi = np.empty(self.ncols)
        self.total_iterations = 0
        self._cold_reset()
        self._apply_bounds(None)

    # -- state construction -------------------------------------------------

    def _cold_reset(self):
        self.T = np.ascontiguousarray(
            np.hstack([self._M, self._b[:, None]]) if self.m else np.zeros((0, self.n + 1))
        )
        self.z = np.concatenate([self._c, [0.0]])
        self.basis = np.arange(self.n, self.ncols, dtype=np.int64)
        self.stat = np.full(self.ncols, _AT_LOWER, dtype=np.int8)
        if self.m:
            self.stat[self.basis] = _BASIC
        self.xB = np.zeros(self.m)

    def _apply_bounds(self, fixings) -> bool:
        """Set working bounds from the LP plus pins; False means contradictory."""
        self.lo[: self.n] = self.lp.bounds[:, 0]
        self.hi[: self.n] = self.lp.bounds[:, 1]
        self.lo[self.n :] = 0.0
        self.hi[self.n :] = self._slack_hi
        if fixings:
            for i, v in fixings.items():
                i = int(i)
                if not 0 <= i < self.n:
                    raise LpInputError(f"fixing index {i} out of range")
                v = float(v)
                if v < self.lp.bounds[i, 0] - FEAS_TOL or v > self.lp.bounds[i, 1] + FEAS_TOL:
                    return False
                v = min(max(v, self.lp.bounds[i, 0]), self.lp.bounds[i, 1])
                self.lo[i] = v
                self.hi[i] = v
        return True

    def install_basis(self, snap: BasisSnapshot):
        """Rebuild the tableau from a stored basis (rows may have been appended)."""
        if snap.num_vars != self.n or snap.num_rows > self.m or len(snap.columns) != snap.num_rows:
            raise StaleBasisError("basis does not match problem dimensions")
        cols = list(snap.columns) + [self.n + i for i in range(snap.num_rows, self.m)]
        cols = np.asarray(cols, dtype=np.int64)
        if cols.size and (cols.min() < 0 or cols.max() >= self.ncols):
            raise StaleBasisError("basis column out of range")
        if len(set(cols.tolist())) != len(cols):
            raise StaleBasisError("repeated basis column")
        Maug = np.hstack([self._M, self._b[:, None]]) if self.m else np.zeros((0, self.n + 1))
        if self.m:
            B = self._M[:, cols]
            try:
                T = np.linalg.solve(B, Maug)
            except np.linalg.LinAlgError as exc:
                raise StaleBasisError("singular basis") from exc
            if not np.all(np.isfinite(T)) or np.max(np.abs(B @ T[:, -1] - self._b)) > 1e-6 * (
                1.0 + np.max(np.abs(self._b), initial=0.0)
            ):
                raise StaleBasisError("numerically singular basis")
        else:
            T = Maug
        self.T = np.ascontiguousarray(T)
        self.basis = cols
        self.stat = np.full(self.ncols, _AT_LOWER, dtype=np.int8)
        for j in snap.at_upper:
            if 0 <= j < self.ncols:
                self.stat[j] = _AT_UPPER
        self.stat[self.basis] = _BASIC
        cB = self._c[self.basis] if self.m else np.zeros(0)
        zfull = np.concatenate([self._c, [0.0]])
        if self.m:
            zfull -= cB @ self.T
        self.z = zfull
        self.xB = np.zeros(self.m)

    def append_row(self, coeffs, sense, rhs):
        """Append one row to the live problem, keeping the current basis."""
        a = np.asarray(coeffs, dtype=np.float64)
        if a.shape != (self.n,):
            raise LpInputError(f"row has shape {a.shape}, expected ({self.n},)")
        sense = _parse_sense(sense)
        rhs = float(rhs)
        self.lp = self.lp.with_row(a, sense, rhs)
        self._recompute_xB()
        old_ncols = self.ncols
        # standard-form data: new slack column goes at the end
        self._M = np.ascontiguousarray(
            np.hstack(
                [
                    np.vstack([self._M, np.concatenate([a, np.zeros(self.m)])[None, :]]),
                    np.zeros((self.m + 1, 1)),
                ]
            )
        )
        self._M[self.m, old_ncols] = 1.0
        self._b = np.concatenate([self._b, [rhs]])
        self._c = np.concatenate([self._c, [0.0]])
        self._slack_hi = np.concatenate([self._slack_hi, [0.0 if sense == EQ else np.inf]])
        # reduce the new row against the current basis; new slack becomes basic
        point = self._full_point()
        ext = np.concatenate([a, np.zeros(self.m), [0.0], [rhs]])  # old cols + new col + b
        T_old = self.T
        red = ext.copy()
        for r in range(self.m):
            f = ext[self.basis[r]]
            if f != 0.0:
                red[: old_ncols] -= f * T_old[r, :old_ncols]
                red[-1] -= f * T_old[r, old_ncols]
        Tnew = np.zeros((self.m + 1, old_ncols + 2))
        Tnew[: self.m, :old_ncols] = T_old[:, :old_ncols]
        Tnew[: self.m, -1] = T_old[:, old_ncols]
        Tnew[self.m] = red
        Tnew[self.m, old_ncols] = 1.0
        self.T = np.ascontiguousarray(Tnew)
        self.z = np.concatenate([self.z[:old_ncols], [0.0], [self.z[old_ncols]]])
        self.basis = np.concatenate(
            [self.basis, np.array([old_ncols], dtype=np.int64)]
        )
        self.stat = np.concatenate([self.stat, np.array([_BASIC], dtype=np.int8)])
        self.m += 1
        self.ncols += 1
        slack_val = rhs - float(a @ point[: self.n])
        self.xB = np.concatenate([self.xB, [slack_val]])
        self.lo = np.concatenate([self.lo, [0.0]])
        self.hi = np.concatenate([self.hi, [self._slack_hi[-1]]])

    # -- state inspection ----------------------------------------------------

    def _nonbasic_values(self):
        xN = np.where(self.stat == _AT_UPPER, self.hi, self.lo)
        xN[self.stat == _BASIC] = 0.0
        return xN

    def _recompute_xB(self):
        xN = self._nonbasic_values()
        nz = np.nonzero((self.stat != _BASIC) & (xN != 0.0))[0]
        xB = self.T[:, self.ncols].copy()
        if nz.size:
            xB -= self.T[:, nz] @ xN[nz]
        self.xB = xB

    def _full_point(self):
        x = self._nonbasic_values()
        if self.m:
            x[self.basis] = self.xB
        return x

    def _primal_feasible(self) -> bool:
        if not self.m:
            return True
        blo = self.lo[self.basis]
        bhi = self.hi[self.basis]
        return bool(np.all(self.xB >= blo - FEAS_TOL) and np.all(self.xB <= bhi + FEAS_TOL))

    def _dual_feasible(self) -> bool:
        zs = self.z[: self.ncols]
        movable = self.hi > self.lo
        bad = ((self.stat == _AT_LOWER) & movable & (zs > OPT_TOL)) | (
            (self.stat == _AT_UPPER) & movable & (zs < -OPT_TOL)
        )
        return not bad.any()

    def _flip_to_sign(self):
        """Park movable nonbasics on the bound matching their reduced cost."""
        zs = self.z[: self.ncols]
        movable = self.hi > self.lo
        up = (self.stat == _AT_LOWER) & movable & (zs > OPT_TOL) & np.isfinite(self.hi)
        dn = (self.stat == _AT_UPPER) & movable & (zs < -OPT_TOL)
        self.stat[up] = _AT_UPPER
        self.stat[dn] = _AT_LOWER

    # -- solving --------------------------------------------------------------

    def _run_loop(self, which) -> int:
        fn = self._kern.primal_loop if which == "primal" else self._kern.dual_loop
        max_iter = 50_000 + 100 * (self.m + self.ncols)
        code, iters = fn(
            self.T,
            self.xB,
            self.z,
            self.basis,
            self.stat,
            self.lo,
            self.hi,
            max_iter,
            BLAND_AFTER,
            FEAS_TOL,
            OPT_TOL,
            PIV_TOL,
        )
        self.total_iterations += iters
        if code == _simplex_py.ITER_LIMIT:
            raise PivotLimitError(f"{which} simplex exceeded {max_iter} pivots")
        return code

    def solve(self, fixings: Optional[Mapping[int, float]] = None) -> LpResult:
        """Solve with the given pins, reusing the current basis when possible.

        A loop's OPTIMAL exit certifies both feasibility sides under the same
        tolerances the driver would use, so the result is extracted directly.
        """
        if not self._apply_bounds(fixings):
            return LpResult(LpStatus.INFEASIBLE)
        self._recompute_xB()
        start_iters = self.total_iterations
        if self._dual_feasible():
            code = self._run_loop("dual")
        elif self._primal_feasible():
            code = self._run_loop("primal")
        else:
            self._flip_to_sign()
            if not self._dual_feasible():
                self._cold_reset()
                self._apply_bounds(fixings)
                self._flip_to_sign()
            self._recompute_xB()
            code = self._run_loop("dual")
        if code == _simplex_py.INFEASIBLE:
            return LpResult(LpStatus.INFEASIBLE, iterations=self.total_iterations - start_iters)
        if code == _simplex_py.UNBOUNDED:
            return LpResult(LpStatus.UNBOUNDED, iterations=self.total_iterations - start_iters)
        return self._extract(self.total_iterations - start_iters)

    def _extract(self, iters: int) -> LpResult:
        x = self._full_point()
        point = x[: self.n].copy()
        value = float(np.dot(self.lp.objective, point))
        dual = -self.z[self.n : self.ncols].copy()
        raw = (self.basis.copy(), self.stat.copy(), self.n, self.m)
        return LpResult(LpStatus.OPTIMAL, point, value, dual, iterations=iters, basis_raw=raw)


# -- module-level operations ------------------------------------------------


def solve(lp: LinearProgram, kernel=None) -> LpResult:
    """Cold-solve an LP to a vertex optimum."""
    return SimplexSolver(lp, kernel=kernel).solve()


def solve_fixed(lp: LinearProgram, fixings: Mapping[int, float], kernel=None) -> LpResult:
    """Solve with variables pinched to fixed values (bounds, not rows)."""
    return SimplexSolver(lp, kernel=kernel).solve(fixings)


def add_row(lp: LinearProgram, coeffs, sense, rhs) -> LinearProgram:
    """Return ``lp`` with one row appended."""
    return lp.with_row(coeffs, sense, rhs)


def warm_solve(
    lp: LinearProgram,
    previous_basis: Optional[BasisSnapshot],
    fixings: Optional[Mapping[int, float]] = None,
    kernel=None,
) -> LpResult:
    """Re-solve from a stored basis; falls back to a cold solve if it is stale."""
    solver = SimplexSolver(lp, kernel=kernel)
    if previous_basis is not None:
        try:
            solver.install_basis(previous_basis)
        except StaleBasisError:
            fresh = SimplexSolver(lp, kernel=kernel)
            return fresh.solve(fixings)._replace_fallback()
    return solver.solve(fixings)


def dual_objective(lp: LinearProgram, result: LpResult) -> float:
    """Objective of the dual certificate carried by an optimal result."""
    if result.status is not LpStatus.OPTIMAL:
        raise LpInputError("dual certificate only exists for optimal results")
    y = result.dual
    d = lp.objective - (lp.A.T @ y if lp.num_rows else 0.0)
    sides = np.where(d > 0.0, lp.bounds[:, 1], lp.bounds[:, 0])
    return float(y @ lp.rhs + d @ sides)


def dual_infeasibility(lp: LinearProgram, result: LpResult) -> float:
    """Largest dual-sign violation: inequality rows need y >= 0."""
    y = result.dual
    if lp.num_rows == 0:
        return 0.0
    viol = np.where(lp.senses == LE, np.maximum(-y, 0.0), 0.0)
    return float(viol.max())


def active_constraint_matrix(lp: LinearProgram, point, tol: float = FEAS_TOL) -> np.ndarray:
    """Rows (constraints and bounds) tight at ``point``, one per matrix row."""
    x = np.asarray(point, dtype=np.float64)
    if x.shape != (lp.num_vars,):
        raise LpInputError("point dimension mismatch")
    rows = []
    if lp.num_rows:
        act = lp.A @ x - lp.rhs
        for r in range(lp.num_rows):
            if lp.senses[r] == EQ or abs(act[r]) <= tol:
                rows.append(lp.A[r])
    eye = np.eye(lp.num_vars)
    for j in range(lp.num_vars):
        if abs(x[j] - lp.bounds[j, 0]) <= tol or abs(x[j] - lp.bounds[j, 1]) <= tol:
            rows.append(eye[j])
    if not rows:
        return np.zeros((0, lp.num_vars))
    return np.vstack(rows)
