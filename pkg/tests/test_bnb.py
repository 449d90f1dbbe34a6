import itertools

import numpy as np
import pytest

from mapbnb.bnb import solve_ilp, solve_map
from mapbnb.lp import LinearProgram
from mapbnb.model import (
    brute_force_map,
    build_local_lp,
    complete_graph_edges,
    make_model,
    random_instance,
    reparametrize_agreement,
)
from mapbnb.vertices import is_vertex, snap_half_integral

from oracles import triangle


def test_root_integral_single_call():
    m = make_model(2, [(0, 1)], [1.0, -1.0], [0.4])
    cfg, value, stats = solve_map(m)
    assert stats.lp_calls == 1 and stats.branches == 0
    _, want = brute_force_map(m)
    assert value == pytest.approx(want, abs=1e-9)


def test_triangle_trace():
    cfg, value, stats = solve_map(triangle())
    assert value == pytest.approx(0.6, abs=1e-12)
    assert stats.branches == 1
    assert stats.lp_calls == 3
    assert sorted(cfg.tolist()) == [0, 0, 1]


def test_single_node_sign():
    for theta, want in ((3.0, [1]), (-2.0, [0])):
        cfg, value, stats = solve_map(make_model(1, [], [theta], []))
        assert cfg.tolist() == want
        assert stats.lp_calls == 1


def test_lp_call_accounting_invariant():
    for seed in range(15):
        m = random_instance(8, 1.0, seed)
        _, _, stats = solve_map(m)
        assert stats.lp_calls == 2 * stats.branches + 1


def test_stats_csv_row():
    _, _, stats = solve_map(triangle())
    cells = stats.csv_row().split(",")
    assert cells[:3] == ["3", "1", "2"]
    assert float(cells[3]) >= 0.0


@pytest.mark.parametrize("seed", range(40))
def test_k12_matches_brute_force(seed):
    m = random_instance(12, 0.3, 7000 + seed)
    cfg, value, stats = solve_map(m)
    bcfg, bvalue = brute_force_map(m)
    assert value == pytest.approx(bvalue, abs=1e-9)


def test_attractive_models_are_root_integral():
    # nonnegative agreement couplings: the relaxation is exact at the root
    rng = np.random.default_rng(12)
    for _ in range(20):
        n = 8
        edges = complete_graph_edges(n)
        at = rng.uniform(-1, 1, n)
        aw = rng.uniform(0.0, 1.0, len(edges))
        m = reparametrize_agreement(n, edges, at, aw)
        _, _, stats = solve_map(m)
        assert stats.branches == 0


def test_no_new_vertices_invariant():
    # every node optimum, seen in original coordinates, is still a vertex of
    # the original polytope
    for seed in (0, 3):
        m = random_instance(12, 0.3, 4200 + seed)
        seen = []

        def record(res):
            seen.append(res.point.copy())

        solve_map(m, on_lp_result=record)
        assert seen
        for point in seen:
            assert is_vertex(m, point)
            assert snap_half_integral(point) is not None


def test_partition_invariant_small():
    # each integral configuration is feasible in exactly one frontier region
    for seed in range(6):
        m = random_instance(7, 1.5, 900 + seed)
        lp = build_local_lp(m)
        configs = list(itertools.product((0, 1), repeat=7))

        def covered_once(node, frontier):
            regions = [node] + list(frontier)
            for x in configs:
                hits = 0
                for reg in regions:
                    if all(x[i] == 0 for i in reg.fixed0) and all(
                        x[i] == 1 for i in reg.fixed1
                    ):
                        hits += 1
                assert hits == 1

        solve_ilp(lp, range(7), inspector=covered_once)


def test_general_ilp_with_rows():
    # knapsack-style: max 4x0+3x1+2x2 st 2x0+2x1+x2 <= 3
    lp = LinearProgram(
        3, [4.0, 3.0, 2.0], rows=[([2.0, 2.0, 1.0], "<=", 3.0)]
    )
    point, value, stats = solve_ilp(lp, range(3))
    best = max(
        (4 * a + 3 * b + 2 * c)
        for a in (0, 1)
        for b in (0, 1)
        for c in (0, 1)
        if 2 * a + 2 * b + c <= 3
    )
    assert value == pytest.approx(best, abs=1e-9)
    assert np.allclose(point, np.rint(point), atol=1e-9)


def test_integral_infeasible_reported():
    # 0.3 <= x <= 0.7 admits no integral point
    lp = LinearProgram(1, [1.0], rows=[([-1.0], "<=", -0.3), ([1.0], "<=", 0.7)])
    point, value, stats = solve_ilp(lp, [0])
    assert point is None and value is None
    assert stats.lp_calls >= 1


def test_infeasible_relaxation_reported():
    lp = LinearProgram(1, [1.0], rows=[([1.0], "<=", -0.5)])
    point, value, stats = solve_ilp(lp, [0])
    assert point is None and stats.lp_calls == 1


def test_mixed_integrality():
    # only x0 integral; x1 stays continuous at its bound
    lp = LinearProgram(2, [1.0, 0.5], rows=[([1.0, 1.0], "<=", 1.5)])
    point, value, stats = solve_ilp(lp, [0])
    assert point[0] in (0.0, 1.0)
    assert value == pytest.approx(1.25, abs=1e-9)
