"""Binary pairwise graphical models and their pairwise-consistency LP.

Two parameterizations are used.  The *product* form scores a configuration
``x in {0,1}^V`` as ``sum_i theta_i x_i + sum_ij w_ij x_i x_j + constant`` and
is what the LP relaxation optimizes.  The *agreement* form scores
``sum_i theta'_i [x_i = 1] + sum_ij w'_ij [x_i = x_j]`` and is the one random
instances are drawn in and the one the text file format stores.  Converting
agreement to product uses ``[x_i = x_j] = 1 - x_i - x_j + 2 x_i x_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from mapbnb.lp import LE, LinearProgram, LpInputError

BRUTE_FORCE_MAX_NODES = 25


@dataclass(frozen=True, eq=False)
class PairwiseModel:
    num_nodes: int
    edges: tuple  # ((i, j), ...) with i < j, lexicographically sorted
    theta: np.ndarray  # product-form node weights
    w: np.ndarray  # product-form edge weights, aligned with `edges`
    constant: float = 0.0
    agreement_theta: Optional[np.ndarray] = None
    agreement_w: Optional[np.ndarray] = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_index(self) -> dict:
        return {e: k for k, e in enumerate(self.edges)}


def normalize_edges(num_nodes: int, edges) -> tuple:
    out = []
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise LpInputError(f"self-loop on node {i}")
        if not (0 <= i < num_nodes and 0 <= j < num_nodes):
            raise LpInputError(f"edge ({i}, {j}) references an unknown node")
        out.append((min(i, j), max(i, j)))
    out.sort()
    for a, b in zip(out, out[1:]):
        if a == b:
            raise LpInputError(f"duplicate edge {a}")
    return tuple(out)


def make_model(num_nodes, edges, theta, w, constant=0.0) -> PairwiseModel:
    """Build a model directly in product form."""
    edges = normalize_edges(num_nodes, edges)
    theta = np.asarray(theta, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if theta.shape != (num_nodes,):
        raise LpInputError("theta size does not match node count")
    if w.shape != (len(edges),):
        raise LpInputError("w size does not match edge count")
    return PairwiseModel(num_nodes, edges, theta, w, float(constant))


def reparametrize_agreement(num_nodes, edges, agree_theta, agree_w) -> PairwiseModel:
    """Convert agreement weights to product form, recording the constant.

    theta_i = theta'_i - sum of w' over edges at i;  w_ij = 2 w'_ij;
    constant = sum of w'.  Objective values of the two forms then agree on
    every configuration.
    """
    edges = normalize_edges(num_nodes, edges)
    at = np.asarray(agree_theta, dtype=np.float64)
    aw = np.asarray(agree_w, dtype=np.float64)
    if at.shape != (num_nodes,):
        raise LpInputError("agreement theta size does not match node count")
    if aw.shape != (len(edges),):
        raise LpInputError("agreement w size does not match edge count")
    theta = at.copy()
    for k, (i, j) in enumerate(edges):
        theta[i] -= aw[k]
        theta[j] -= aw[k]
    return PairwiseModel(
        num_nodes,
        edges,
        theta,
        2.0 * aw,
        float(aw.sum()),
        agreement_theta=at.copy(),
        agreement_w=aw.copy(),
    )


def complete_graph_edges(n: int) -> tuple:
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


def random_instance(num_nodes: int, strength: float, seed) -> PairwiseModel:
    """Random complete-graph instance in the agreement parameterization.

    Node weights are Uniform(-1, 1), edge weights Uniform(-strength, strength),
    drawn in that order from a PCG64 generator seeded with ``seed``, edges in
    lexicographic order.  The same seed reproduces the model bit for bit.
    """
    if num_nodes < 1:
        raise LpInputError("need at least one node")
    if strength < 0:
        raise LpInputError("strength must be nonnegative")
    rng = np.random.default_rng(seed)
    edges = complete_graph_edges(num_nodes)
    at = rng.uniform(-1.0, 1.0, num_nodes)
    aw = rng.uniform(-strength, strength, len(edges))
    return reparametrize_agreement(num_nodes, edges, at, aw)


def build_local_lp(model: PairwiseModel) -> LinearProgram:
    """LP relaxation over node variables then edge variables.

    Variables: q_i for each node, then q_ij per edge in lexicographic order.
    Rows per edge: q_ij <= q_i, q_ij <= q_j, q_i + q_j - q_ij <= 1; the
    q_ij >= 0 side lives in the variable bound.  Row count is exactly
    3 * num_edges; variable count num_nodes + num_edges.
    """
    n = model.num_nodes
    nv = n + model.num_edges
    c = np.concatenate([model.theta, model.w])
    rows = []
    for k, (i, j) in enumerate(model.edges):
        e = n + k
        a1 = np.zeros(nv)
        a1[e] = 1.0
        a1[i] = -1.0
        rows.append((a1, LE, 0.0))
        a2 = np.zeros(nv)
        a2[e] = 1.0
        a2[j] = -1.0
        rows.append((a2, LE, 0.0))
        a3 = np.zeros(nv)
        a3[i] = 1.0
        a3[j] = 1.0
        a3[e] = -1.0
        rows.append((a3, LE, 1.0))
    return LinearProgram(nv, c, rows)


def objective_value(model: PairwiseModel, point) -> float:
    """Linear objective at a point over V then E, plus the recorded constant."""
    q = np.asarray(point, dtype=np.float64)
    nv = model.num_nodes + model.num_edges
    if q.shape != (nv,):
        raise LpInputError(f"point has shape {q.shape}, expected ({nv},)")
    return float(
        model.theta @ q[: model.num_nodes] + model.w @ q[model.num_nodes :] + model.constant
    )


def config_objective(model: PairwiseModel, x) -> float:
    """Objective of an integral configuration (edges take x_i * x_j)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.num_nodes,):
        raise LpInputError("configuration size does not match node count")
    q_e = np.array([x[i] * x[j] for i, j in model.edges])
    return float(model.theta @ x + model.w @ q_e + model.constant)


def extend_to_point(model: PairwiseModel, x) -> np.ndarray:
    """Lift a configuration to the full V-then-E coordinate vector."""
    x = np.asarray(x, dtype=np.float64)
    q_e = np.array([x[i] * x[j] for i, j in model.edges])
    return np.concatenate([x, q_e])


def _all_configs(n: int) -> np.ndarray:
    # row k holds the bits of k with x_0 the least-significant bit
    ks = np.arange(2**n, dtype=np.int64)
    return ((ks[:, None] >> np.arange(n)) & 1).astype(np.int8)


def brute_force_map(model: PairwiseModel):
    """Exact argmax by enumeration of all 2^n configurations.

    Ties resolve to the configuration whose encoding as a binary counter
    (x_0 least significant) is smallest.  Guarded to n <= 25.
    """
    n = model.num_nodes
    if n > BRUTE_FORCE_MAX_NODES:
        raise LpInputError(f"brute force limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}")
    best_val = -np.inf
    best_cfg = None
    chunk = 1 << min(n, 20)
    total = 1 << n
    for start in range(0, total, chunk):
        ks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        X = ((ks[:, None] >> np.arange(n)) & 1).astype(np.float64)
        vals = X @ model.theta
        for k, (i, j) in enumerate(model.edges):
            vals += model.w[k] * X[:, i] * X[:, j]
        pos = int(np.argmax(vals))
        if vals[pos] > best_val:
            best_val = float(vals[pos])
            best_cfg = X[pos].astype(np.int8)
    return best_cfg, best_val + model.constant


# -- text file format ---------------------------------------------------------
#
#   # optional comments
#   n m
#   i theta_i          (n lines, agreement parameterization)
#   i j w_ij           (m lines)


def _agreement_params(model: PairwiseModel):
    if model.agreement_theta is not None and model.agreement_w is not None:
        return model.agreement_theta, model.agreement_w
    # derive an equivalent agreement form; the stored constant is dropped in
    # favor of the derived one, so only objective *differences* are preserved
    aw = model.w / 2.0
    at = model.theta.copy()
    for k, (i, j) in enumerate(model.edges):
        at[i] += aw[k]
        at[j] += aw[k]
    return at, aw


def format_model(model: PairwiseModel) -> str:
    at, aw = _agreement_params(model)
    lines = [f"{model.num_nodes} {model.num_edges}"]
    for i in range(model.num_nodes):
        lines.append(f"{i} {float(at[i])!r}")
    for k, (i, j) in enumerate(model.edges):
        lines.append(f"{i} {j} {float(aw[k])!r}")
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> PairwiseModel:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise LpInputError("empty model file")
    if len(rows[0]) != 2:
        raise LpInputError("header must be 'n m'")
    n, m = int(rows[0][0]), int(rows[0][1])
    if len(rows) != 1 + n + m:
        raise LpInputError(f"expected {1 + n + m} data lines, found {len(rows)}")
    at = np.zeros(n)
    seen = set()
    for fields in rows[1 : 1 + n]:
        if len(fields) != 2:
            raise LpInputError("node line must be 'i theta_i'")
        i = int(fields[0])
        if i in seen or not 0 <= i < n:
            raise LpInputError(f"bad node index {i}")
        seen.add(i)
        at[i] = float(fields[1])
    edges = []
    aw_by_edge = {}
    for fields in rows[1 + n :]:
        if len(fields) != 3:
            raise LpInputError("edge line must be 'i j w_ij'")
        i, j = int(fields[0]), int(fields[1])
        key = (min(i, j), max(i, j))
        edges.append(key)
        aw_by_edge[key] = float(fields[2])
    norm = normalize_edges(n, edges)
    aw = np.array([aw_by_edge[e] for e in norm])
    return reparametrize_agreement(n, norm, at, aw)


def save_model(model: PairwiseModel, path) -> None:
    Path(path).write_text(format_model(model), encoding="utf-8")


def load_model(path) -> PairwiseModel:
    return parse_model(Path(path).read_text(encoding="utf-8"))
