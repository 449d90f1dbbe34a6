"""Best-first branch and bound for 0-1 programs over an LP relaxation.

The frontier is a max-priority queue on node LP value with FIFO order on
ties.  A popped node whose integer-marked coordinates are all integral is
optimal (best-first invariant).  Otherwise the lowest-index fractional
integer variable is pinned to 0 and to 1, producing two child LPs; with
half-integral relaxations every fractional coordinate equals 1/2, so no
most-fractional rule would do better.  Both child solves are counted even
when a child is infeasible and discarded, giving lp_calls == 2 * branches + 1
including the root.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from mapbnb.lp import LinearProgram, LpInputError, LpStatus, SimplexSolver
from mapbnb.model import PairwiseModel, build_local_lp

INT_TOL = 1e-6


@dataclass(frozen=True)
class BranchNode:
    fixed0: frozenset
    fixed1: frozenset
    value: float
    point: np.ndarray


@dataclass
class SolveStats:
    lp_calls: int = 0
    branches: int = 0
    max_frontier: int = 0
    wall_time: float = 0.0

    def csv_row(self) -> str:
        return f"{self.lp_calls},{self.branches},{self.max_frontier},{self.wall_time!r}"


def _first_fractional(point, int_vars, tol):
    for i in int_vars:
        if abs(point[i] - round(point[i])) > tol:
            return i
    return None


def _node_fixings(fixed0, fixed1):
    f = {i: 0.0 for i in fixed0}
    f.update({i: 1.0 for i in fixed1})
    return f


def solve_ilp(
    lp: LinearProgram,
    integer_vars,
    int_tol: float = INT_TOL,
    kernel=None,
    on_lp_result: Optional[Callable] = None,
    inspector: Optional[Callable] = None,
):
    """Exact solve with integrality required on ``integer_vars``.

    Returns (point, value, stats); point is None when no integral-feasible
    solution exists.  ``on_lp_result`` sees every feasible LP result (root and
    children); ``inspector`` sees (popped_node, frontier_nodes) at each pop.
    """
    int_vars = sorted(set(int(i) for i in integer_vars))
    if int_vars and (int_vars[0] < 0 or int_vars[-1] >= lp.num_vars):
        raise LpInputError("integer variable index out of range")
    stats = SolveStats()
    start = time.perf_counter()
    solver = SimplexSolver(lp, kernel=kernel)
    root = solver.solve()
    stats.lp_calls = 1
    if root.status is LpStatus.UNBOUNDED:
        raise LpInputError("unbounded relaxation cannot be certified")
    if root.status is LpStatus.INFEASIBLE:
        stats.wall_time = time.perf_counter() - start
        return None, None, stats
    if on_lp_result is not None:
        on_lp_result(root)
    counter = 0
    heap = [(-root.value, counter, BranchNode(frozenset(), frozenset(), root.value, root.point))]
    stats.max_frontier = 1
    while heap:
        _, _, node = heapq.heappop(heap)
        if inspector is not None:
            inspector(node, [entry[2] for entry in heap])
        frac = _first_fractional(node.point, int_vars, int_tol)
        if frac is None:
            point = node.point.copy()
            for i in int_vars:
                point[i] = round(point[i])
            stats.wall_time = time.perf_counter() - start
            return point, node.value, stats
        stats.branches += 1
        for side in (0, 1):
            fixed0 = node.fixed0 | {frac} if side == 0 else node.fixed0
            fixed1 = node.fixed1 | {frac} if side == 1 else node.fixed1
            res = solver.solve(_node_fixings(fixed0, fixed1))
            stats.lp_calls += 1
            if res.status is LpStatus.OPTIMAL:
                if on_lp_result is not None:
                    on_lp_result(res)
                counter += 1
                heapq.heappush(
                    heap, (-res.value, counter, BranchNode(fixed0, fixed1, res.value, res.point))
                )
        if len(heap) > stats.max_frontier:
            stats.max_frontier = len(heap)
    stats.wall_time = time.perf_counter() - start
    return None, None, stats


def solve_map(
    model: PairwiseModel,
    int_tol: float = INT_TOL,
    kernel=None,
    on_lp_result: Optional[Callable] = None,
    inspector: Optional[Callable] = None,
):
    """MAP assignment of a pairwise model, integrality enforced on nodes only.

    Edge coordinates of the relaxation are forced once all nodes are integral,
    so they stay continuous.  Returns (configuration, value, stats) with the
    model constant included in the value.
    """
    lp = build_local_lp(model)
    point, value, stats = solve_ilp(
        lp,
        range(model.num_nodes),
        int_tol=int_tol,
        kernel=kernel,
        on_lp_result=on_lp_result,
        inspector=inspector,
    )
    if point is None:
        raise RuntimeError("pairwise-consistency relaxation cannot be infeasible")
    config = np.rint(point[: model.num_nodes]).astype(np.int8)
    return config, value + model.constant, stats
