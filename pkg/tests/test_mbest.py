import itertools

import numpy as np
import pytest

from mapbnb.bnb import solve_ilp
from mapbnb.mbest import m_best_integral
from mapbnb.model import build_local_lp, config_objective, make_model, random_instance

from oracles import triangle


def brute_top_values(model, m):
    vals = sorted(
        (config_objective(model, x) for x in itertools.product((0, 1), repeat=model.num_nodes)),
        reverse=True,
    )
    return vals[:m]


def test_m1_reduces_to_branch_and_bound():
    m = random_instance(8, 0.8, 31)
    lp = build_local_lp(m)
    res = m_best_integral(lp, range(8), 1)
    point, value, _ = solve_ilp(lp, range(8))
    assert len(res.solutions) == 1
    assert res.solutions[0][1] == pytest.approx(value, abs=1e-9)
    assert np.array_equal(res.solutions[0][0][:8], point[:8])


def test_triangle_top4():
    res = m_best_integral(build_local_lp(triangle()), range(3), 4)
    got = [v for _, v in res.solutions]
    assert got == pytest.approx([0.6, 0.6, 0.6, 0.2], abs=1e-9)
    assert res.complete


def test_values_nonincreasing():
    m = random_instance(9, 1.0, 77)
    res = m_best_integral(build_local_lp(m), range(9), 8)
    vals = [v for _, v in res.solutions]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("seed", range(8))
def test_k12_top5_matches_brute_force(seed):
    model = random_instance(12, 0.3, 600 + seed)
    res = m_best_integral(build_local_lp(model), range(12), 5)
    got = sorted((v - 0.0 for _, v in res.solutions), reverse=True)
    want = [v - model.constant for v in brute_top_values(model, 5)]
    assert got == pytest.approx(want, abs=1e-9)


def test_enumerates_everything_exactly_once():
    # requesting all 2^n solutions exercises the space partition fully: the
    # built-in duplicate assertion plus completeness checks it is a partition
    m = random_instance(5, 1.2, 3)
    res = m_best_integral(build_local_lp(m), range(5), 32)
    assert res.complete and len(res.solutions) == 32
    seen = {tuple(int(v) for v in sol[:5]) for sol, _ in res.solutions}
    assert len(seen) == 32
    want = sorted(
        (config_objective(m, x) - m.constant for x in itertools.product((0, 1), repeat=5)),
        reverse=True,
    )
    assert [v for _, v in res.solutions] == pytest.approx(want, abs=1e-9)


def test_shorter_list_flagged_when_supply_runs_out():
    m = make_model(2, [(0, 1)], [1.0, -0.5], [0.25])
    res = m_best_integral(build_local_lp(m), range(2), 10)
    assert not res.complete
    assert len(res.solutions) == 4


def test_lp_call_bound():
    for seed in range(6):
        model = random_instance(10, 0.5, 80 + seed)
        res = m_best_integral(build_local_lp(model), range(10), 5)
        n = 10
        bound = n * res.stats.fractional_patterns + n * 5 + 1
        assert res.stats.lp_calls <= bound


def test_csv_serialization():
    res = m_best_integral(build_local_lp(triangle()), range(3), 4)
    lines = res.to_csv(range(3)).splitlines()
    assert lines[0] == "rank,value,config"
    assert len(lines) == 5
    rank, value, bits = lines[1].split(",")
    assert rank == "1" and float(value) == pytest.approx(0.6) and set(bits) <= {"0", "1"}
    assert len(bits) == 3


def test_fractional_pop_patterns_are_distinct():
    model = make_model(
        4,
        [(0, 1), (0, 2), (1, 2), (2, 3)],
        [0.6, 0.6, 0.6, 0.1],
        [-1.0, -1.0, -1.0, -0.2],
    )
    res = m_best_integral(build_local_lp(model), range(4), 6)
    assert res.stats.fractional_patterns == res.stats.fractional_pops
