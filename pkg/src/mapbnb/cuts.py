"""Cycle-inequality cutting planes for the pairwise-consistency relaxation.

One most-violated cycle inequality is appended per round and the LP
re-solved warm (dual simplex).  The loop stops on an integral optimum, when
no violated inequality exists, when the separator repeats an identical cut,
or at the round limit.  The cycle relaxation need not be integral, so a
stalled fractional outcome is a legitimate result; callers fall back to
branch and bound on the cut-augmented LP when they need the exact optimum.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from mapbnb.lp import LE, LpInputError, LpStatus, SimplexSolver
from mapbnb.model import PairwiseModel, build_local_lp
from mapbnb.svf import estimate_svc
from mapbnb.vertices import eval_cycle_inequality, is_vertex, round_half, separate_cycle

INT_TOL = 1e-6


class CutOutcome(Enum):
    INTEGRAL = "integral"
    STALLED_FRACTIONAL = "stalled_fractional"
    ROUND_LIMIT = "round_limit"


@dataclass
class CuttingPlaneResult:
    outcome: CutOutcome
    point: np.ndarray  # final LP optimum over V then E
    value: float  # objective including the model constant
    num_cuts: int
    cuts: list  # CycleCut, in the order appended
    lp_calls: int
    # one record per fractional post-cut optimum: (node pattern, value with
    # constant, whether the point is a vertex of the *original* polytope);
    # patterns that are not let the pipelines count vertices the cuts created
    fractional_rounds: tuple = ()
    wall_time: float = 0.0

    def introduced_patterns(self, threshold: float, tol: float = 1e-9) -> set:
        """Distinct cut-created patterns whose value exceeds ``threshold``."""
        return {
            pattern
            for pattern, value, original in self.fractional_rounds
            if not original and value > threshold + tol
        }


def cutting_plane_solve(
    model: PairwiseModel,
    max_rounds: int = 1000,
    kernel=None,
    on_root_result: Optional[Callable] = None,
) -> CuttingPlaneResult:
    """Iterated separation of the most frustrated cycle."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    start = time.perf_counter()
    solver = SimplexSolver(build_local_lp(model), kernel=kernel)
    res = solver.solve()
    lp_calls = 1
    if res.status is not LpStatus.OPTIMAL:
        raise RuntimeError("pairwise-consistency relaxation must be solvable")
    if on_root_result is not None:
        on_root_result(res)
    cuts = []
    seen = set()
    rounds_log = []
    outcome = CutOutcome.ROUND_LIMIT
    for rounds in range(max_rounds):
        point = res.point
        if np.all(np.abs(point - np.rint(point)) <= INT_TOL):
            outcome = CutOutcome.INTEGRAL
            break
        if rounds > 0:
            # post-cut fractional optimum; flag it when the cuts created it
            try:
                original = is_vertex(model, point)
            except LpInputError:
                original = False
            pattern = tuple(float(v) for v in round_half(point[: model.num_nodes]))
            rounds_log.append((pattern, res.value + model.constant, original))
        cut = separate_cycle(model, point)
        if cut is None:
            outcome = CutOutcome.STALLED_FRACTIONAL
            break
        key = (frozenset(cut.cycle_edges), frozenset(cut.odd_edges))
        if key in seen:
            # an identical inequality is already present: treat as a stall
            outcome = CutOutcome.STALLED_FRACTIONAL
            break
        if eval_cycle_inequality(point, cut) >= -1e-9:
            raise RuntimeError("separator returned a non-violated inequality")
        seen.add(key)
        solver.append_row(cut.coeffs, LE, cut.rhs)
        cuts.append(cut)
        res = solver.solve()
        lp_calls += 1
        if res.status is not LpStatus.OPTIMAL:
            raise RuntimeError("valid inequalities cannot make the relaxation infeasible")
    point = res.point.copy()
    if outcome is CutOutcome.INTEGRAL:
        point = np.rint(point)
    return CuttingPlaneResult(
        outcome=outcome,
        point=point,
        value=res.value + model.constant,
        num_cuts=len(cuts),
        cuts=cuts,
        lp_calls=lp_calls,
        fractional_rounds=tuple(rounds_log),
        wall_time=time.perf_counter() - start,
    )


def count_cut_induced(
    model: PairwiseModel,
    cuts,
    base_report=None,
    kernel=None,
) -> int:
    """Confounding patterns of the cut polytope absent from the original's.

    Runs the estimator on the cut-augmented relaxation and counts reported
    patterns (spurious included on both sides) that the plain estimator did
    not report.
    """
    if base_report is None:
        base_report = estimate_svc(model, kernel=kernel)
    if not cuts:
        return 0
    rows = [(cut.coeffs, LE, cut.rhs) for cut in cuts]
    augmented = estimate_svc(model, extra_rows=rows, kernel=kernel)
    return len(set(augmented.patterns) - set(base_report.patterns))
