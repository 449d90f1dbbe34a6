"""Estimate the confounding singleton-marginal patterns of a pairwise model.

A fractional vertex whose objective beats the best integral one is
*confounding*; its rounded node block (fractional entries to 1/2) is its
singleton pattern.  The estimator runs best-first ternary branching: each
popped fractional optimum is recorded by pattern, then its region is split
over the unfixed nodes and the values {0, 1/2, 1}, Murty-Lawler style on the
rounded pattern so regions stay disjoint on the half-integral grid.  The
first integral pop is the integral optimum and stops the search, at which
point everything recorded strictly above it is the estimate.

Pinning a node to 1/2 is not a face of the polytope and can surface points
that are not vertices of the original polytope, so the estimate is an upper
set.  Each pattern is therefore checked: first the popped point itself, then
an exact search for the best vertex completion of the pattern; patterns
failing both are reported as spurious rather than silently dropped.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
import numpy as np

from mapbnb.lp import LpInputError, LpStatus, SimplexSolver
from mapbnb.model import PairwiseModel, build_local_lp
from mapbnb.vertices import best_vertex_completion_value, is_vertex, round_half

INT_TOL = 1e-6
TIE_TOL = 1e-9
MAX_NODES = 16
TERNARY = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class ConfoundingReport:
    patterns: tuple  # distinct node patterns with objective above the best integral
    pattern_values: tuple  # recorded objective per pattern, aligned with patterns
    count: int  # == len(patterns); the upper estimate
    spurious: frozenset  # patterns with no vertex completion above the threshold
    best_integral_value: float
    tied_patterns: tuple  # recorded patterns whose value ties the threshold
    pops: int
    lp_calls: int
    wall_time: float
    rejected_points: int = 0  # pops that failed to snap into [0, 1]

    def csv_row(self, instance_id) -> str:
        return (
            f"{instance_id},{self.count},{len(self.spurious)},"
            f"{float(self.best_integral_value)!r}"
        )


def estimate_svc(
    model: PairwiseModel,
    extra_rows=(),
    max_nodes: int = MAX_NODES,
    kernel=None,
) -> ConfoundingReport:
    """Upper estimate of the confounding singleton patterns of ``model``.

    ``extra_rows`` (an iterable of (coeffs, sense, rhs)) restricts the
    polytope, e.g. with cycle inequalities; the spurious check always refers
    to the original polytope.  Values include the model constant.
    """
    n = model.num_nodes
    if n > max_nodes:
        raise LpInputError(f"estimator limited to {max_nodes} nodes, got {n}")
    start = time.perf_counter()
    lp = build_local_lp(model)
    for coeffs, sense, rhs in extra_rows:
        lp = lp.with_row(coeffs, sense, rhs)
    solver = SimplexSolver(lp, kernel=kernel)
    root = solver.solve()
    lp_calls = 1
    if root.status is not LpStatus.OPTIMAL:
        raise LpInputError("relaxation must be feasible and bounded")

    counter = 0
    heap = []

    def push(fixings, res):
        nonlocal counter
        integral = bool(
            np.all(np.abs(res.point[:n] - np.rint(res.point[:n])) <= INT_TOL)
        )
        counter += 1
        # fractional pops win value ties so equal-value patterns are recorded
        heapq.heappush(heap, (-res.value, 1 if integral else 0, counter, integral, fixings, res.point))

    push({}, root)
    recorded = {}
    rejected = 0
    pops = 0
    best_integral = None
    while heap:
        neg_value, _, _, integral, fixings, point = heapq.heappop(heap)
        pops += 1
        value = -neg_value + model.constant
        if integral:
            best_integral = value
            break
        try:
            pattern = tuple(float(v) for v in round_half(point[:n]))
        except LpInputError:
            rejected += 1  # failed to snap into [0, 1]; keep searching
            continue
        if pattern not in recorded:
            recorded[pattern] = (value, point)
        acc = dict(fixings)
        for i in range(n):
            if i in acc:
                continue
            for a in TERNARY:
                if a == pattern[i]:
                    continue
                child = dict(acc)
                child[i] = a
                res = solver.solve(child)
                lp_calls += 1
                if res.status is LpStatus.OPTIMAL:
                    push(child, res)
            acc[i] = pattern[i]
    if best_integral is None:
        raise RuntimeError("ternary search exhausted without an integral optimum")

    patterns = []
    tied = []
    spurious = set()
    for pattern, (value, point) in recorded.items():
        if value <= best_integral + TIE_TOL:
            tied.append(pattern)
            continue
        patterns.append((pattern, value))
        genuine = is_vertex(model, point, _assume_feasible=True)
        if not genuine:
            completion = best_vertex_completion_value(model, np.array(pattern))
            genuine = completion is not None and completion > best_integral + TIE_TOL
        if not genuine:
            spurious.add(pattern)
    patterns.sort()
    tied.sort()
    return ConfoundingReport(
        patterns=tuple(p for p, _ in patterns),
        pattern_values=tuple(v for _, v in patterns),
        count=len(patterns),
        spurious=frozenset(spurious),
        best_integral_value=best_integral,
        tied_patterns=tuple(tied),
        pops=pops,
        lp_calls=lp_calls,
        wall_time=time.perf_counter() - start,
        rejected_points=rejected,
    )
