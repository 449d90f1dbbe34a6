"""Ranked enumeration of the best integral solutions of a 0-1 program.

Fractional frontier nodes branch exactly as in :mod:`mapbnb.bnb`.  A popped
integral node is emitted and its region is split Murty-Lawler style: walking
the unfixed indices in ascending order, child k pins indices before it to the
emitted values and flips index k, so the children plus the emitted point
partition the region.  Emission order is therefore nonincreasing in value,
and no integral solution can ever be produced twice.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from mapbnb.lp import LinearProgram, LpInputError, LpStatus, SimplexSolver
from mapbnb.bnb import INT_TOL, _first_fractional, _node_fixings
from mapbnb.vertices import round_half


@dataclass
class MBestStats:
    lp_calls: int = 0
    integral_pops: int = 0
    fractional_pops: int = 0
    fractional_patterns: int = 0  # distinct rounded patterns among fractional pops
    max_frontier: int = 0
    wall_time: float = 0.0


@dataclass
class MBestResult:
    solutions: list  # [(point, value)] nonincreasing in value
    complete: bool  # False when fewer than the requested M exist
    stats: MBestStats

    def to_csv(self, integer_vars) -> str:
        """Rows ``rank,value,config`` with the configuration as a bitstring."""
        int_vars = sorted(set(int(i) for i in integer_vars))
        lines = ["rank,value,config"]
        for rank, (point, value) in enumerate(self.solutions, start=1):
            bits = "".join(str(int(round(point[i]))) for i in int_vars)
            lines.append(f"{rank},{float(value)!r},{bits}")
        return "\n".join(lines) + "\n"


def m_best_integral(
    lp: LinearProgram,
    integer_vars,
    m_solutions: int,
    int_tol: float = INT_TOL,
    kernel=None,
) -> MBestResult:
    """Collect up to ``m_solutions`` integral solutions in value order."""
    if m_solutions < 1:
        raise LpInputError("need m_solutions >= 1")
    int_vars = sorted(set(int(i) for i in integer_vars))
    if int_vars and (int_vars[0] < 0 or int_vars[-1] >= lp.num_vars):
        raise LpInputError("integer variable index out of range")
    stats = MBestStats()
    start = time.perf_counter()
    solver = SimplexSolver(lp, kernel=kernel)
    root = solver.solve()
    stats.lp_calls = 1
    if root.status is LpStatus.UNBOUNDED:
        raise LpInputError("unbounded relaxation cannot be certified")
    solutions = []
    patterns = set()
    emitted = set()
    if root.status is not LpStatus.INFEASIBLE:
        counter = 0
        heap = []

        def push(fixed0, fixed1, res):
            nonlocal counter
            integral = _first_fractional(res.point, int_vars, int_tol) is None
            counter += 1
            heapq.heappush(
                heap,
                (-res.value, 0 if integral else 1, counter, integral, fixed0, fixed1, res.point),
            )

        push(frozenset(), frozenset(), root)
        stats.max_frontier = 1
        while heap and len(solutions) < m_solutions:
            neg_value, _, _, integral, fixed0, fixed1, point = heapq.heappop(heap)
            if integral:
                stats.integral_pops += 1
                sol = point.copy()
                for i in int_vars:
                    sol[i] = round(sol[i])
                key = tuple(int(sol[i]) for i in int_vars)
                if key in emitted:
                    raise AssertionError("space partition produced a duplicate solution")
                emitted.add(key)
                solutions.append((sol, -neg_value))
                # split the region around the emitted point
                agree0, agree1 = set(fixed0), set(fixed1)
                for i in int_vars:
                    if i in fixed0 or i in fixed1:
                        continue
                    vi = int(round(point[i]))
                    child0 = frozenset(agree0 | {i}) if vi == 1 else frozenset(agree0)
                    child1 = frozenset(agree1 | {i}) if vi == 0 else frozenset(agree1)
                    res = solver.solve(_node_fixings(child0, child1))
                    stats.lp_calls += 1
                    if res.status is LpStatus.OPTIMAL:
                        push(child0, child1, res)
                    if vi == 1:
                        agree1.add(i)
                    else:
                        agree0.add(i)
            else:
                stats.fractional_pops += 1
                patterns.add(tuple(float(v) for v in round_half(point[int_vars])))
                frac = _first_fractional(point, int_vars, int_tol)
                for side in (0, 1):
                    child0 = fixed0 | {frac} if side == 0 else fixed0
                    child1 = fixed1 | {frac} if side == 1 else fixed1
                    res = solver.solve(_node_fixings(child0, child1))
                    stats.lp_calls += 1
                    if res.status is LpStatus.OPTIMAL:
                        push(child0, child1, res)
            if len(heap) > stats.max_frontier:
                stats.max_frontier = len(heap)
    stats.fractional_patterns = len(patterns)
    stats.wall_time = time.perf_counter() - start
    return MBestResult(solutions, len(solutions) == m_solutions, stats)
