import itertools

import numpy as np
import pytest

from mapbnb.lp import LpInputError
from mapbnb.model import (
    brute_force_map,
    build_local_lp,
    complete_graph_edges,
    config_objective,
    extend_to_point,
    format_model,
    load_model,
    make_model,
    objective_value,
    parse_model,
    random_instance,
    reparametrize_agreement,
    save_model,
)

from oracles import triangle


def agreement_objective(n, edges, at, aw, x):
    total = 0.0
    for i in range(n):
        total += at[i] * (x[i] == 1)
    for k, (i, j) in enumerate(edges):
        total += aw[k] * (x[i] == x[j])
    return total


def test_reparametrize_zero():
    m = reparametrize_agreement(2, [(0, 1)], [0.0, 0.0], [0.0])
    assert np.all(m.theta == 0) and np.all(m.w == 0) and m.constant == 0.0


def test_reparametrize_single_edge():
    m = reparametrize_agreement(2, [(0, 1)], [0.0, 0.0], [1.0])
    assert m.theta.tolist() == [-1.0, -1.0]
    assert m.w.tolist() == [2.0]
    assert m.constant == 1.0
    # both parameterizations value every configuration identically
    for x in itertools.product((0, 1), repeat=2):
        assert config_objective(m, x) == pytest.approx(
            agreement_objective(2, [(0, 1)], [0.0, 0.0], [1.0], x), abs=1e-12
        )
    assert config_objective(m, (0, 0)) == pytest.approx(1.0)
    assert config_objective(m, (1, 1)) == pytest.approx(1.0)


def test_reparametrize_k4_exhaustive():
    rng = np.random.default_rng(3)
    edges = complete_graph_edges(4)
    at = rng.uniform(-1, 1, 4)
    aw = rng.uniform(-1, 1, 6)
    m = reparametrize_agreement(4, edges, at, aw)
    for x in itertools.product((0, 1), repeat=4):
        want = agreement_objective(4, edges, at, aw, x)
        assert abs(config_objective(m, x) - want) <= 1e-12


def test_random_instance_single_node():
    m = random_instance(1, 0.5, 9)
    assert m.num_edges == 0
    assert -1 < m.agreement_theta[0] < 1


def test_random_instance_k12():
    m = random_instance(12, 0.3, 0)
    assert m.num_edges == 66
    assert np.all(np.abs(m.agreement_w) < 0.3)
    assert np.all(np.abs(m.agreement_theta) < 1.0)


def test_random_instance_deterministic():
    a = random_instance(12, 0.3, 1234)
    b = random_instance(12, 0.3, 1234)
    assert np.array_equal(a.theta, b.theta)
    assert np.array_equal(a.w, b.w)
    assert a.constant == b.constant
    c = random_instance(12, 0.3, 1235)
    assert not np.array_equal(a.theta, c.theta)


def test_objective_value_examples():
    tri = triangle()
    nv = 6
    assert objective_value(tri, np.zeros(nv)) == pytest.approx(0.0)
    assert objective_value(tri, np.ones(nv)) == pytest.approx(3 * 0.6 - 3.0)
    assert objective_value(tri, [0.5, 0.5, 0.5, 0, 0, 0]) == pytest.approx(0.9)
    with pytest.raises(LpInputError):
        objective_value(tri, np.zeros(5))


def test_objective_includes_constant():
    m = reparametrize_agreement(2, [(0, 1)], [0.0, 0.0], [1.0])
    assert objective_value(m, np.zeros(3)) == pytest.approx(1.0)


def test_brute_force_single_node():
    m = make_model(1, [], [3.0], [])
    cfg, val = brute_force_map(m)
    assert cfg.tolist() == [1] and val == pytest.approx(3.0)


def test_brute_force_triangle_tie_break():
    cfg, val = brute_force_map(triangle())
    assert val == pytest.approx(0.6, abs=1e-12)
    assert cfg.tolist() == [1, 0, 0]


def test_brute_force_guard():
    m = make_model(26, [], np.zeros(26), [])
    with pytest.raises(LpInputError):
        brute_force_map(m)


def test_local_lp_shape():
    m = random_instance(6, 0.5, 4)
    lp = build_local_lp(m)
    assert lp.num_vars == 6 + 15
    assert lp.num_rows == 3 * 15
    assert np.all(lp.bounds[:, 0] == 0.0) and np.all(lp.bounds[:, 1] == 1.0)


def test_single_node_lp_sign():
    m = make_model(1, [], [-2.0], [])
    from mapbnb.lp import solve

    r = solve(build_local_lp(m))
    assert r.value == pytest.approx(0.0) and r.point[0] == pytest.approx(0.0)


def test_single_edge_lp_integral():
    m = make_model(2, [(0, 1)], [1.0, 1.0], [-5.0])
    from mapbnb.lp import solve

    # oracle: brute force over the 4 configurations
    best = max(config_objective(m, x) for x in itertools.product((0, 1), repeat=2))
    assert best == pytest.approx(1.0)
    r = solve(build_local_lp(m))
    assert r.value == pytest.approx(best, abs=1e-9)
    assert np.allclose(r.point, np.rint(r.point), atol=1e-9)
    assert int(round(r.point[0] + r.point[1])) == 1


def test_integral_configurations_are_feasible_points():
    m = random_instance(5, 1.0, 11)
    lp = build_local_lp(m)
    for x in itertools.product((0, 1), repeat=5):
        q = extend_to_point(m, x)
        assert np.all(lp.A @ q <= lp.rhs + 1e-12)


def test_product_form_matches_configuration_scores():
    rng = np.random.default_rng(8)
    m = random_instance(10, 1.0, 21)
    for _ in range(1000):
        x = rng.integers(0, 2, 10)
        q = extend_to_point(m, x)
        assert abs(objective_value(m, q) - config_objective(m, x)) <= 1e-12


def test_model_file_round_trip(tmp_path):
    m = random_instance(7, 0.8, 99)
    path = tmp_path / "model.txt"
    save_model(m, path)
    loaded = load_model(path)
    assert np.array_equal(loaded.agreement_theta, m.agreement_theta)
    assert np.array_equal(loaded.agreement_w, m.agreement_w)
    assert np.array_equal(loaded.theta, m.theta)
    assert np.array_equal(loaded.w, m.w)
    assert loaded.constant == m.constant
    # writer output is a fixpoint of parse-then-write
    text = format_model(m)
    assert format_model(parse_model(text)) == text


def test_model_file_comments_and_validation(tmp_path):
    text = "# a comment\n2 1\n0 0.25\n1 -0.5\n0 1 0.125  # trailing\n"
    m = parse_model(text)
    assert m.agreement_theta.tolist() == [0.25, -0.5]
    assert m.agreement_w.tolist() == [0.125]
    with pytest.raises(LpInputError):
        parse_model("2 2\n0 0.1\n1 0.2\n0 1 0.3\n")  # missing an edge line
    with pytest.raises(LpInputError):
        parse_model("2 1\n0 0.1\n1 0.2\n1 1 0.3\n")  # self loop


def test_direct_model_round_trip_argmax_preserved(tmp_path):
    tri = triangle()
    path = tmp_path / "tri.txt"
    save_model(tri, path)
    loaded = load_model(path)
    # product weights survive; the constant moves to the derived agreement form
    assert np.allclose(loaded.theta, tri.theta, atol=1e-12)
    assert np.allclose(loaded.w, tri.w, atol=1e-12)
    a, av = brute_force_map(tri)
    b, bv = brute_force_map(loaded)
    assert a.tolist() == b.tolist()


def test_edge_validation():
    with pytest.raises(LpInputError):
        make_model(3, [(0, 0)], np.zeros(3), [1.0])
    with pytest.raises(LpInputError):
        make_model(3, [(0, 1), (1, 0)], np.zeros(3), [1.0, 2.0])
    with pytest.raises(LpInputError):
        make_model(2, [(0, 5)], np.zeros(2), [1.0])
