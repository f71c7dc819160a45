"""Ring-separator decision tree for near neighbor queries over a distance oracle.

A Ring node splits its point set S with a pivot s and radius R into
``in = B(s, R + 2r) & S`` and ``out = S - B(s, R)``. A query goes in iff
d(q, s) <= R + r; any point within r of q is then in the chosen child. Splits are
only taken when (|B(s, R + 2r)| / |S|)^(1 + eps) < |B(s, R)| / |S|, which bounds
the total number of stored points by |S|^(1 + eps).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .oracle import DistanceOracle, IndexReport


# Relative slack on the ring radii: routing uses (R + r)(1 + TOL) and the inner
# child keeps (R + 2r)(1 + 2 TOL), so rounding in computed distances cannot
# separate a near pair.
TOL = 1e-9


class TreeDepthExceeded(RuntimeError):
    pass


@dataclass
class Leaf:
    ids: np.ndarray


@dataclass
class ClusterLeaf:
    rep: int
    radius: float
    ids: np.ndarray


@dataclass
class Ring:
    pivot: int
    R: float
    slack: float
    inner: object = None
    outer: object = None
    ids: np.ndarray | None = None

    @property
    def reach(self) -> float:
        """Points of S within this distance of the pivot go to the inner child."""
        return (self.R + self.slack) * (1.0 + 2.0 * TOL)

    def goes_in(self, dq: float, r: float) -> bool:
        return dq <= (self.R + r) * (1.0 + TOL)


@dataclass
class BuildStats:
    rings: int = 0
    leaves: int = 0
    cluster_leaves: int = 0
    fallback_leaves: int = 0
    depth: int = 0
    stored: int = 0
    build_evals: int = 0


@dataclass
class RingTree:
    root: object
    points: np.ndarray
    r: float
    eps: float
    leaf_cap: int
    c_cl: float
    stats: BuildStats = field(default_factory=BuildStats)

    @property
    def slack(self) -> float:
        return 2.0 * self.r

    def nodes(self):
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            if isinstance(node, Ring):
                stack.append((node.outer, depth + 1))
                stack.append((node.inner, depth + 1))

    def leaf_load(self) -> int:
        """Total points held by leaves (a cluster leaf counts every point it covers)."""
        return sum(len(n.ids) for n, _ in self.nodes() if not isinstance(n, Ring))


def default_depth_cap(n: int, eps: float) -> int:
    return max(64, int(math.ceil(8 * math.log2(max(n, 2)) / eps)))


def build_ring_tree(
    points,
    oracle: DistanceOracle,
    r: float,
    eps: float = 0.5,
    leaf_cap: int = 8,
    c_cl: float = 1.0,
    n_pivots: int = 32,
    n_radii: int = 64,
    depth_cap: int | None = None,
    seed: int = 0,
    keep_ids: bool = False,
    min_shrink: float | None = None,
) -> RingTree:
    """Build the tree iteratively.

    Per node: a Leaf when |S| <= leaf_cap; a ClusterLeaf when a sampled pivot has
    every point of S within c_cl * r; otherwise the most balanced (pivot, radius)
    pair satisfying the growth condition over sampled pivots and quantile radii;
    if none qualifies, a fallback Leaf. A split must also leave both children at
    most (1 - min_shrink) |S| (default eps / 8), which keeps the depth within
    8 ln(n) / eps. ``keep_ids`` stores each Ring's point set for audits.
    """
    P = np.asarray(points, dtype=float)
    n = len(P)
    if n < 1:
        raise ValueError("need at least one point")
    if not r > 0:
        raise ValueError("r must be positive")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if leaf_cap < 1:
        raise ValueError("leaf_cap must be >= 1")
    depth_cap = default_depth_cap(n, eps) if depth_cap is None else depth_cap
    min_shrink = eps / 8.0 if min_shrink is None else min_shrink
    rng = np.random.default_rng(seed)
    stats = BuildStats()
    start_evals = oracle.evals
    slack = 2.0 * r
    qs = np.linspace(0.0, 1.0, n_radii)

    root_holder = [None]
    # (ids, depth, parent, attribute name on parent)
    stack = [(np.arange(n), 0, None, None)]
    while stack:
        ids, depth, parent, attr = stack.pop()
        if depth > depth_cap:
            raise TreeDepthExceeded(f"depth {depth} exceeds cap {depth_cap}")
        stats.depth = max(stats.depth, depth)
        node = _split(P, ids, oracle, r, eps, leaf_cap, c_cl, n_pivots, qs, slack, rng, stats, min_shrink)
        if isinstance(node, Ring):
            in_ids, out_ids = node.inner, node.outer
            if keep_ids:
                node.ids = ids
            node.inner = node.outer = None
            stack.append((out_ids, depth + 1, node, "outer"))
            stack.append((in_ids, depth + 1, node, "inner"))
        else:
            stats.stored += len(node.ids)
        if parent is None:
            root_holder[0] = node
        else:
            setattr(parent, attr, node)
    stats.build_evals = oracle.evals - start_evals
    return RingTree(root_holder[0], P, r, eps, leaf_cap, c_cl, stats)


def _split(P, ids, oracle, r, eps, leaf_cap, c_cl, n_pivots, qs, slack, rng, stats, min_shrink):
    m = len(ids)
    if m <= leaf_cap:
        stats.leaves += 1
        return Leaf(ids)
    piv = ids if m <= n_pivots else np.sort(rng.choice(ids, size=n_pivots, replace=False))
    dist = np.stack([oracle.many(P[s], P[ids]) for s in piv])
    spread = dist.max(axis=1)
    tight = np.flatnonzero(spread <= c_cl * r)
    if tight.size:
        stats.cluster_leaves += 1
        return ClusterLeaf(int(piv[tight[0]]), c_cl * r, ids)

    cap = (1.0 - min_shrink) * m
    ds = np.sort(dist, axis=1)
    radii = np.quantile(ds, qs, axis=1).T  # (pivots, radii)
    reach = (radii + slack) * (1.0 + 2.0 * TOL)
    inner = np.stack([np.searchsorted(ds[a], reach[a], side="right") for a in range(len(piv))])
    ball = np.stack([np.searchsorted(ds[a], radii[a], side="right") for a in range(len(piv))])
    ok = (inner <= cap) & (m - ball <= cap) & (ball >= 1) & ((inner / m) ** (1.0 + eps) < ball / m)
    best = None
    if ok.any():
        # most balanced: smallest larger child, then smallest inner child, then first pivot/radius
        key = np.where(ok, np.maximum(inner, m - ball) * (m + 1) + inner, np.iinfo(np.int64).max)
        a, j = np.unravel_index(int(np.argmin(key)), key.shape)
        best = (None, int(a), float(radii[a, j]))
    if best is None:
        stats.leaves += 1
        stats.fallback_leaves += 1
        return Leaf(ids)
    _, a, R = best
    row = dist[a]
    stats.rings += 1
    node = Ring(int(piv[a]), R, slack)
    node.inner, node.outer = ids[row <= node.reach], ids[row > R]
    return node


def query_ring_tree(tree: RingTree, oracle: DistanceOracle, q) -> IndexReport:
    """Route by d(q, pivot) <= R + r (up to TOL); exact scan at leaves (ties to the smallest id)."""
    start = oracle.evals
    node = tree.root
    visited = 0
    while True:
        visited += 1
        if isinstance(node, Ring):
            dq = oracle(q, tree.points[node.pivot])
            node = node.inner if node.goes_in(dq, tree.r) else node.outer
            continue
        if isinstance(node, ClusterLeaf):
            dist = oracle(q, tree.points[node.rep])
            return IndexReport(node.rep, dist, oracle.evals - start, visited, 1)
        ids = np.sort(node.ids)
        dist = oracle.many(q, tree.points[ids])
        j = int(np.argmin(dist))
        return IndexReport(int(ids[j]), float(dist[j]), oracle.evals - start, visited, 1)


def route_child(tree: RingTree, node: Ring, oracle: DistanceOracle, q):
    dq = oracle(q, tree.points[node.pivot])
    return node.inner if node.goes_in(dq, tree.r) else node.outer


def node_ids(node) -> np.ndarray:
    """All point ids held below a node."""
    if isinstance(node, Ring):
        if node.ids is not None:
            return node.ids
        return np.union1d(node_ids(node.inner), node_ids(node.outer))
    return node.ids
