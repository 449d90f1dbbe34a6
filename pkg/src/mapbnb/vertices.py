"""Half-integral point machinery for the pairwise-consistency polytope.

Vertices of that polytope have all coordinates in {0, 1/2, 1}, and a
half-integral point is a vertex exactly when every connected component of the
subgraph induced by its fractional nodes contains a cycle with an odd number
of zero-valued edges (a *frustrated* cycle).  This module provides the
rounding map onto {0, 1/2, 1}, the component/frustration tests, the
odd-count rank criterion for the cyclic sign system, cycle-inequality
construction and evaluation, and an exact most-violated-cycle separator.

The separator and the vertex-completion search share one primitive: a
minimum-cost closed walk with odd label parity in a two-layer graph, found by
Dijkstra from every start node.  Any such walk of cost below the violation
threshold contains a simple odd cycle of no greater cost, which is extracted
by repeatedly excising even sub-loops.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

import numpy as np

from mapbnb.lp import LpInputError
from mapbnb.model import PairwiseModel

SNAP_TOL = 1e-6
FEAS_TOL = 1e-7
VIOLATION_TOL = 1e-9


def snap_half_integral(q, tol: float = SNAP_TOL) -> Optional[np.ndarray]:
    """Snap to exact {0, 1/2, 1}; None if any coordinate is farther than tol."""
    q = np.asarray(q, dtype=np.float64)
    snapped = np.round(q * 2.0) / 2.0
    if np.any(np.abs(q - snapped) > tol) or snapped.min(initial=0.0) < 0.0 or snapped.max(
        initial=0.0
    ) > 1.0:
        return None
    return snapped


def round_half(x, tol: float = SNAP_TOL) -> np.ndarray:
    """Map coordinates to 0 or 1 when within tol of them, else to 1/2."""
    x = np.asarray(x, dtype=np.float64)
    if x.size and (x.min() < -tol or x.max() > 1.0 + tol):
        raise LpInputError("coordinate outside [0, 1]")
    out = np.full(x.shape, 0.5)
    out[np.abs(x) <= tol] = 0.0
    out[np.abs(x - 1.0) <= tol] = 1.0
    return out


_edge_arrays_cache: dict = {}


def _edge_arrays(model: PairwiseModel):
    key = id(model)
    hit = _edge_arrays_cache.get(key)
    if hit is None or hit[0] is not model:
        if len(_edge_arrays_cache) > 64:
            _edge_arrays_cache.clear()
        ii = np.array([i for i, _ in model.edges], dtype=np.int64)
        jj = np.array([j for _, j in model.edges], dtype=np.int64)
        hit = (model, ii, jj)
        _edge_arrays_cache[key] = hit
    return hit[1], hit[2]


def local_feasibility_error(model: PairwiseModel, q) -> float:
    """Largest violation of the pairwise-consistency constraints at q."""
    q = np.asarray(q, dtype=np.float64)
    n = model.num_nodes
    nv = n + model.num_edges
    if q.shape != (nv,):
        raise LpInputError(f"point has shape {q.shape}, expected ({nv},)")
    err = max(float(np.max(-q, initial=0.0)), float(np.max(q - 1.0, initial=0.0)))
    if model.num_edges:
        ii, jj = _edge_arrays(model)
        qe = q[n:]
        qi = q[ii]
        qj = q[jj]
        err = max(
            err,
            float(np.max(qe - qi)),
            float(np.max(qe - qj)),
            float(np.max(qi + qj - qe - 1.0)),
        )
    return max(err, 0.0)


@dataclass(frozen=True)
class InducedComponent:
    """A connected component of the fractional-node induced subgraph."""

    nodes: tuple
    edges: tuple  # (i, j) pairs with i < j
    edge_values: tuple  # snapped q_ij per edge, each 0.0 or 0.5


def fractional_components(model: PairwiseModel, q) -> list:
    """Components of the subgraph induced by nodes at 1/2, with edge values."""
    snapped = snap_half_integral(q)
    if snapped is None:
        raise LpInputError("point is not half-integral")
    n = model.num_nodes
    frac = {i for i in range(n) if snapped[i] == 0.5}
    adj = {i: [] for i in frac}
    val = {}
    for k, (i, j) in enumerate(model.edges):
        if i in frac and j in frac:
            adj[i].append(j)
            adj[j].append(i)
            val[(i, j)] = float(snapped[n + k])
    comps = []
    seen = set()
    for start in sorted(frac):
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        nodes = []
        while stack:
            u = stack.pop()
            nodes.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        nodes.sort()
        inside = set(nodes)
        edges = tuple(e for e in sorted(val) if e[0] in inside and e[1] in inside)
        comps.append(
            InducedComponent(tuple(nodes), edges, tuple(val[e] for e in edges))
        )
    return comps


def find_frustrated_cycle(component: InducedComponent):
    """A simple cycle with an odd number of zero edges, or None.

    Parity-labeled spanning-tree search: label each node with the zero-edge
    parity of its tree path; a non-tree edge whose endpoints' labels disagree
    with its own zero flag closes a frustrated cycle.
    """
    zero = {}
    adj = {u: [] for u in component.nodes}
    for (i, j), v in zip(component.edges, component.edge_values):
        z = 1 if v == 0.0 else 0
        zero[(i, j)] = z
        adj[i].append(j)
        adj[j].append(i)
    parity = {}
    parent = {}
    depth = {}
    root = component.nodes[0] if component.nodes else None
    if root is None:
        return None
    parity[root] = 0
    parent[root] = None
    depth[root] = 0
    queue = [root]
    qi = 0
    tree_edges = set()
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        for v in adj[u]:
            if v not in parity:
                e = (min(u, v), max(u, v))
                parity[v] = parity[u] ^ zero[e]
                parent[v] = u
                depth[v] = depth[u] + 1
                tree_edges.add(e)
                queue.append(v)
    for e in component.edges:
        if e in tree_edges:
            continue
        u, v = e
        if parity[u] ^ parity[v] != zero[e]:
            # walk both endpoints up to their common ancestor
            pu, pv = u, v
            left, right = [], []
            while depth[pu] > depth[pv]:
                left.append((min(pu, parent[pu]), max(pu, parent[pu])))
                pu = parent[pu]
            while depth[pv] > depth[pu]:
                right.append((min(pv, parent[pv]), max(pv, parent[pv])))
                pv = parent[pv]
            while pu != pv:
                left.append((min(pu, parent[pu]), max(pu, parent[pu])))
                right.append((min(pv, parent[pv]), max(pv, parent[pv])))
                pu = parent[pu]
                pv = parent[pv]
            return left + right[::-1] + [e]
    return None


def is_vertex(model: PairwiseModel, q, tol: float = SNAP_TOL, _assume_feasible: bool = False) -> bool:
    """Vertex test: half-integral and every fractional component frustrated."""
    if not _assume_feasible and local_feasibility_error(model, q) > FEAS_TOL:
        raise LpInputError("point is outside the polytope")
    if snap_half_integral(q, tol) is None:
        return False
    return all(
        find_frustrated_cycle(comp) is not None for comp in fractional_components(model, q)
    )


def parity_rank(signs) -> bool:
    """Whether the cyclic band system over the given +-1 signs has full rank.

    Equivalent to an odd number of +1 entries; requires length >= 3.
    """
    t = [int(v) for v in signs]
    if len(t) < 3:
        raise LpInputError("need at least three signs")
    if any(v not in (-1, 1) for v in t):
        raise LpInputError("signs must be +-1")
    return sum(1 for v in t if v == 1) % 2 == 1


def cycle_sign_matrix(signs) -> np.ndarray:
    """The cyclic band matrix whose rank parity_rank predicts."""
    t = [int(v) for v in signs]
    n = len(t)
    mat = np.zeros((n, n))
    for k in range(n):
        mat[k, k] = 1.0
        mat[k, (k + 1) % n] = t[k]
    return mat


def fractional_cycle_system(pairs, edge_values) -> np.ndarray:
    """Tight-constraint system of an all-fractional cycle assignment.

    Variables are the cycle's nodes then its edges.  A zero edge contributes
    the rows q_i + q_j - q_e = 1 and q_e = 0; a half edge contributes
    q_i - q_e = 0 and q_j - q_e = 0.  Returned as a plain coefficient matrix
    (one row per equation) for rank testing.
    """
    nodes = sorted({u for e in pairs for u in e})
    nidx = {u: a for a, u in enumerate(nodes)}
    nn = len(nodes)
    rows = []
    for k, ((i, j), v) in enumerate(zip(pairs, edge_values)):
        e = nn + k
        width = nn + len(pairs)
        if v == 0.0:
            r1 = np.zeros(width)
            r1[nidx[i]] = 1.0
            r1[nidx[j]] = 1.0
            r1[e] = -1.0
            r2 = np.zeros(width)
            r2[e] = 1.0
            rows.extend([r1, r2])
        else:
            r1 = np.zeros(width)
            r1[nidx[i]] = 1.0
            r1[e] = -1.0
            r2 = np.zeros(width)
            r2[nidx[j]] = 1.0
            r2[e] = -1.0
            rows.extend([r1, r2])
    return np.vstack(rows) if rows else np.zeros((0, 0))


# -- cycle inequalities -------------------------------------------------------


@dataclass(frozen=True)
class CycleCut:
    """One cycle inequality: a simple cycle and an odd subset of its edges."""

    cycle_edges: tuple
    odd_edges: tuple
    coeffs: np.ndarray  # row over V then E
    rhs: float  # |odd_edges| - 1


def make_cycle_cut(model: PairwiseModel, cycle_edges, odd_edges) -> CycleCut:
    cyc = tuple(sorted((min(i, j), max(i, j)) for i, j in cycle_edges))
    odd = tuple(sorted((min(i, j), max(i, j)) for i, j in odd_edges))
    if len(set(cyc)) != len(cyc) or len(set(odd)) != len(odd):
        raise LpInputError("repeated edge in cycle or odd set")
    if not set(odd) <= set(cyc):
        raise LpInputError("odd set must lie inside the cycle")
    if len(odd) % 2 == 0:
        raise LpInputError("odd set must have odd size")
    degree = {}
    for i, j in cyc:
        degree[i] = degree.get(i, 0) + 1
        degree[j] = degree.get(j, 0) + 1
    if any(d != 2 for d in degree.values()) or len(cyc) < 3:
        raise LpInputError("edges do not form a simple cycle")
    eidx = model.edge_index()
    n = model.num_nodes
    coeffs = np.zeros(n + model.num_edges)
    odd_set = set(odd)
    for e in cyc:
        if e not in eidx:
            raise LpInputError(f"cycle edge {e} not in the model")
        sign = 1.0 if e in odd_set else -1.0
        i, j = e
        coeffs[i] += sign
        coeffs[j] += sign
        coeffs[n + eidx[e]] -= 2.0 * sign
    return CycleCut(cyc, odd, coeffs, float(len(odd) - 1))


def eval_cycle_inequality(q, cut: CycleCut) -> float:
    """Slack of the inequality at q; negative means violated."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != cut.coeffs.shape:
        raise LpInputError("point dimension does not match the cut")
    return float(cut.rhs - cut.coeffs @ q)


def _min_odd_closed_walk(nodes, edges, cost_plain, cost_marked):
    """Cheapest closed walk whose marked-edge count is odd.

    Runs a two-layer Dijkstra from each node; traversing edge k in the current
    layer costs cost_plain[k], switching layers costs cost_marked[k].  Returns
    (cost, steps) with steps a list of (u, v, marked), or (inf, None).
    """
    adj = {u: [] for u in nodes}
    for k, (i, j) in enumerate(edges):
        adj[i].append((j, k))
        adj[j].append((i, k))
    best_cost = np.inf
    best_walk = None
    for s in nodes:
        if not adj[s]:
            continue
        dist = {(s, 0): 0.0}
        pred = {}
        heap = [(0.0, s, 0)]
        while heap:
            d, u, layer = heapq.heappop(heap)
            if d > dist.get((u, layer), np.inf):
                continue
            if (u, layer) == (s, 1):
                break
            for v, k in adj[u]:
                for marked, cost in ((0, cost_plain[k]), (1, cost_marked[k])):
                    nl = layer ^ marked
                    nd = d + cost
                    key = (v, nl)
                    if nd < dist.get(key, np.inf):
                        dist[key] = nd
                        pred[key] = (u, layer, k, marked)
                        heapq.heappush(heap, (nd, v, nl))
        d = dist.get((s, 1), np.inf)
        if d < best_cost:
            steps = []
            node, layer = s, 1
            while (node, layer) != (s, 0):
                u, ul, k, marked = pred[(node, layer)]
                i, j = edges[k]
                steps.append((u, node, bool(marked)))
                node, layer = u, ul
            best_cost = d
            best_walk = steps[::-1]
    return best_cost, best_walk


def _extract_simple_odd_cycle(walk):
    """Reduce a closed odd walk to a simple odd cycle of no greater cost."""
    while True:
        visits = [walk[0][0]] + [st[1] for st in walk]
        inner = visits[:-1]
        first_at = {}
        rep = None
        for idx, v in enumerate(inner):
            if v in first_at:
                rep = (first_at[v], idx)
                break
            first_at[v] = idx
        if rep is None:
            return walk
        p, r = rep
        sub = walk[p:r]
        rest = walk[:p] + walk[r:]
        if sum(1 for st in sub if st[2]) % 2 == 1:
            walk = sub
        else:
            walk = rest


def separate_cycle(model: PairwiseModel, q, tol: float = VIOLATION_TOL):
    """Most-violated cycle inequality at q, or None if all are satisfied.

    Edge ij is scored by phi = q_i + q_j - 2 q_ij (clamped to [0, 1]); a
    parity-odd closed walk costing phi on plain steps and 1 - phi on marked
    steps certifies a violated inequality exactly when its cost is below 1.
    """
    q = np.asarray(q, dtype=np.float64)
    n = model.num_nodes
    if q.shape != (n + model.num_edges,):
        raise LpInputError("point dimension does not match the model")
    phi = np.empty(model.num_edges)
    for k, (i, j) in enumerate(model.edges):
        phi[k] = q[i] + q[j] - 2.0 * q[n + k]
    np.clip(phi, 0.0, 1.0, out=phi)
    cost, walk = _min_odd_closed_walk(range(n), model.edges, phi, 1.0 - phi)
    if walk is None or cost >= 1.0 - tol:
        return None
    simple = _extract_simple_odd_cycle(walk)
    if len(simple) < 3:
        return None
    cycle_edges = [(min(u, v), max(u, v)) for u, v, _ in simple]
    odd_edges = [(min(u, v), max(u, v)) for u, v, marked in simple if marked]
    return make_cycle_cut(model, cycle_edges, odd_edges)


def _bridges(nodes, pairs):
    """Bridge edges of an undirected graph, by iterative DFS low-links."""
    adj = {u: [] for u in nodes}
    for idx, (i, j) in enumerate(pairs):
        adj[i].append((j, idx))
        adj[j].append((i, idx))
    order = {}
    low = {}
    bridges = set()
    counter = 0
    for root in nodes:
        if root in order:
            continue
        stack = [(root, -1, iter(adj[root]))]
        order[root] = low[root] = counter
        counter += 1
        while stack:
            u, in_edge, it = stack[-1]
            advanced = False
            for v, idx in it:
                if idx == in_edge:
                    continue
                if v not in order:
                    order[v] = low[v] = counter
                    counter += 1
                    stack.append((v, idx, iter(adj[v])))
                    advanced = True
                    break
                low[u] = min(low[u], order[v])
            if not advanced:
                stack.pop()
                if stack:
                    p, pidx, _ = stack[-1]
                    low[p] = min(low[p], low[u])
                    if low[u] > order[p]:
                        bridges.add(pidx)
    return bridges


def best_vertex_completion_value(model: PairwiseModel, pattern) -> Optional[float]:
    """Best objective of a polytope vertex whose node block equals pattern.

    Edges with an integral endpoint are forced; each half-half edge chooses
    freely between 0 and 1/2, preferring 1/2 on positive weights and 0
    otherwise.  A completion is a vertex exactly when every fractional
    component carries an odd-zero-count cycle.  Since the preferred choice
    costs nothing, the cheapest frustration per component is 0 when the
    preferred labels already close an odd cycle, and otherwise the cheapest
    single flip |w|/2 over the component's non-bridge edges (flipping one
    cycle edge makes that cycle odd; bridges lie on no cycle).  Returns None
    when some component is a forest and can never be frustrated.
    """
    p = np.asarray(pattern, dtype=np.float64)
    n = model.num_nodes
    if p.shape != (n,):
        raise LpInputError("pattern size does not match node count")
    if snap_half_integral(p) is None:
        raise LpInputError("pattern is not half-integral")
    value = float(model.theta @ p) + model.constant
    free = []
    for k, (i, j) in enumerate(model.edges):
        if p[i] == 0.5 and p[j] == 0.5:
            free.append((k, i, j))
        else:
            forced_lo = max(0.0, p[i] + p[j] - 1.0)
            forced_hi = min(p[i], p[j])
            if forced_lo != forced_hi:
                raise AssertionError("edge with an integral endpoint must be forced")
            value += model.w[k] * forced_lo
    frac_nodes = sorted(i for i in range(n) if p[i] == 0.5)
    if not frac_nodes:
        return value
    adj = {u: [] for u in frac_nodes}
    for k, i, j in free:
        adj[i].append(j)
        adj[j].append(i)
    seen = set()
    for start in frac_nodes:
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        comp = set()
        while stack:
            u = stack.pop()
            comp.add(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        comp_edges = [(k, i, j) for k, i, j in free if i in comp]
        if len(comp_edges) < len(comp):
            return None  # tree component: no cycle to frustrate
        value += sum(max(model.w[k], 0.0) / 2.0 for k, _, _ in comp_edges)
        pairs = tuple((i, j) for _, i, j in comp_edges)
        preferred = tuple(0.5 if model.w[k] > 0.0 else 0.0 for k, _, _ in comp_edges)
        comp_obj = InducedComponent(tuple(sorted(comp)), pairs, preferred)
        if find_frustrated_cycle(comp_obj) is not None:
            continue
        bridge_idx = _bridges(comp_obj.nodes, pairs)
        flips = [
            abs(model.w[k]) / 2.0
            for pos, (k, _, _) in enumerate(comp_edges)
            if pos not in bridge_idx
        ]
        if not flips:
            return None  # every edge is a bridge: no cycle exists
        value -= min(flips)
    return value
