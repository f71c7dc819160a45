"""Composed ANN indexes: randomized l_inf reductions, max/sum products, symmetric norms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..gfunc import GFunction
from ..leveling import LevelParams
from ..netgen import EmbeddingSpec, build_embedding
from ..randmap import (
    DegenerateNormError,
    RandMapParams,
    make_rng,
    product_l1_scalings,
    sample_scalings,
    symmetric_G,
    topk_G,
)
from ..vecnorm import SymmetricNorm, TopK, normalized
from .oracle import (
    DistanceOracle,
    IndexReport,
    linf_distance,
    max_product_distance,
    norm_distance,
    sum_product_distance,
)
from .ringtree import RingTree, build_ring_tree, query_ring_tree

__all__ = [
    "TreeOptions",
    "OrliczPipeline",
    "MaxProductIndex",
    "SumProductIndex",
    "SymNormIndex",
    "build_orlicz_pipeline",
    "build_topk_pipeline",
    "build_general_pipeline",
    "build_max_product_index",
    "build_sum_product_index",
    "build_symnorm_index",
]


@dataclass(frozen=True)
class TreeOptions:
    eps: float = 0.5
    leaf_cap: int = 8
    c_cl: float = 1.0
    n_pivots: int = 32
    n_radii: int = 64

    def build(self, points, oracle, r, seed) -> RingTree:
        return build_ring_tree(
            points, oracle, r, self.eps, self.leaf_cap, self.c_cl, self.n_pivots, self.n_radii, seed=seed
        )


def _accept(candidates, true_oracle, q, points, threshold, report):
    """Smallest-id candidate whose true distance is within threshold."""
    best = None
    for cid in sorted(set(c for c in candidates if c is not None)):
        dist = true_oracle(q, points[cid])
        report.evals += 1
        if dist <= threshold:
            best = (cid, dist)
            break
    if best is not None:
        report.candidate, report.distance = best
    return report


@dataclass
class OrliczPipeline:
    """Repetitions of (random scaling, l_inf ring tree on the scaled points).

    A point p is stored in repetition i as p / (m u_i), m = ``map_radius`` (r unless
    G is calibrated to a rescaled norm); the tree radius is 1.
    Queries run every repetition and keep the smallest-id candidate whose true
    distance is at most ``accept_factor * r``.
    """

    points: np.ndarray
    norm: SymmetricNorm
    G: GFunction
    params: RandMapParams
    r: float
    accept_factor: float
    map_radius: float
    scalings: list = field(default_factory=list)
    trees: list = field(default_factory=list)

    def __post_init__(self):
        self.true_oracle = norm_distance(self.norm)
        self.linf = linf_distance()

    @property
    def reps(self) -> int:
        return len(self.trees)

    @property
    def threshold(self) -> float:
        return self.accept_factor * self.r

    def query(self, q) -> IndexReport:
        q = np.asarray(q, dtype=float)
        rep = IndexReport(None, None)
        start = self.linf.evals
        cands = []
        for u, tree in zip(self.scalings, self.trees):
            out = query_ring_tree(tree, self.linf, q / (self.map_radius * u.u))
            rep.nodes += out.nodes
            cands.append(out.candidate)
        rep.reps = self.reps
        rep.evals += self.linf.evals - start
        return _accept(cands, self.true_oracle, q, self.points, self.threshold, rep)


def build_orlicz_pipeline(points, norm: SymmetricNorm, G: GFunction, params: RandMapParams, r: float,
                          reps: int | None = None, tree: TreeOptions = TreeOptions(),
                          accept_factor: float | None = None, map_radius: float | None = None) -> OrliczPipeline:
    """reps defaults to ceil(n^eps); accept_factor defaults to alpha * D."""
    P = np.asarray(points, dtype=float)
    n, d = P.shape
    if not r > 0:
        raise ValueError("r must be positive")
    reps = int(math.ceil(n**tree.eps)) if reps is None else int(reps)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    accept = params.alpha * params.D if accept_factor is None else accept_factor
    m = float(r) if map_radius is None else float(map_radius)
    pipe = OrliczPipeline(P, norm, G, params, float(r), float(accept), m)
    for i in range(reps):
        u = sample_scalings(G, params, d, rep=i)
        pipe.scalings.append(u)
        pipe.trees.append(tree.build(P / (m * u.u), pipe.linf, 1.0, seed=_tree_seed(params.seed, i)))
    return pipe


def _tree_seed(seed: int, i: int) -> int:
    return int(make_rng(seed, i, 1).integers(0, 2**63))


def build_topk_pipeline(points, k: int, params: RandMapParams, eps: float = 0.5, r: float = 1.0,
                        reps: int | None = None, tree: TreeOptions | None = None) -> OrliczPipeline:
    """Top-k ANN via the step-linear scaling G(t) = t [t >= 1/k]."""
    P = np.asarray(points, dtype=float)
    tree = TreeOptions(eps=eps) if tree is None else tree
    return build_orlicz_pipeline(P, TopK(P.shape[1], k), topk_G(k, P.shape[1]), params, r, reps, tree)


def build_general_pipeline(points, norm: SymmetricNorm, params: RandMapParams, beta: float = 1.5,
                           r: float = 1.0, reps: int | None = None,
                           tree: TreeOptions = TreeOptions(), shifted: bool = True) -> OrliczPipeline:
    """Any symmetric norm through the level-count G, rescaled by 1 / (2 log_beta d).

    Candidates are accepted up to alpha * D * 7 log_beta d * r. ``shifted`` selects
    the level weights 1 / L_(k+1), under which a near point keeps its survival
    probability for every symmetric norm (see :func:`symmetric_G`).
    """
    P = np.asarray(points, dtype=float)
    gspec = symmetric_G(norm, beta, params.alpha, shifted=shifted)
    if gspec.degenerate:
        raise DegenerateNormError("all level thresholds are infinite; the level-count map is uninformative")
    accept = params.alpha * params.D * 3.5 * gspec.level_bound
    # G is calibrated for the normalized norm, in which a radius-r ball has radius r * factor
    return build_orlicz_pipeline(P, norm, gspec.rescaled_G(), params, r, reps, tree, accept,
                                 map_radius=r * gspec.factor)


@dataclass
class MaxProductIndex:
    points: np.ndarray
    factors: list
    r: float
    blocks: int | None
    tree: RingTree
    oracle: DistanceOracle

    def query(self, q) -> IndexReport:
        return query_ring_tree(self.tree, self.oracle, np.asarray(q, dtype=float))


def build_max_product_index(points, factors, r: float, eps: float = 0.5, blocks: int | None = None,
                            tree: TreeOptions | None = None, seed: int = 0) -> MaxProductIndex:
    """Ring tree over D(x, y) = max_i c_i T(k_i)(x_i - y_i)."""
    tree = TreeOptions(eps=eps) if tree is None else tree
    P = np.asarray(points, dtype=float)
    oracle = max_product_distance(factors, blocks)
    return MaxProductIndex(P, list(factors), float(r), blocks, tree.build(P, oracle, r, seed), oracle)


@dataclass
class SumProductIndex:
    points: np.ndarray
    factors: list
    params: RandMapParams
    r: float
    blocks: int | None
    inner: list
    scalings: list

    def __post_init__(self):
        self.true_oracle = sum_product_distance(self.factors, self.blocks)

    @property
    def threshold(self) -> float:
        return self.params.alpha * self.params.D * self.r

    def query(self, q) -> IndexReport:
        q = np.asarray(q, dtype=float)
        rep = IndexReport(None, None, reps=len(self.inner))
        cands = []
        for idx in self.inner:
            out = idx.query(q)
            rep.evals += out.evals
            rep.nodes += out.nodes
            cands.append(out.candidate)
        return _accept(cands, self.true_oracle, q, self.points, self.threshold, rep)


def build_sum_product_index(points, factors, params: RandMapParams, reps: int, r: float = 1.0,
                            blocks: int | None = None, tree: TreeOptions = TreeOptions(),
                            rng=None) -> SumProductIndex:
    """Per repetition, divide factor i's weight by u_i ~ 1 - mu^t and index the max product."""
    P = np.asarray(points, dtype=float)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    inner, scalings = [], []
    for i in range(reps):
        gen = make_rng(params.seed, i) if rng is None else rng
        u = product_l1_scalings(params.mu, len(factors), gen)
        scaled = [(k, c / ui) for (k, c), ui in zip(factors, u.u)]
        inner.append(build_max_product_index(P, scaled, r, blocks=blocks, tree=tree, seed=_tree_seed(params.seed, i)))
        scalings.append(u)
    return SumProductIndex(P, list(factors), params, float(r), blocks, inner, scalings)


@dataclass
class SymNormIndex:
    """ANN for a symmetric norm through its top-k net embedding.

    direct: one ring tree over D^(x, y) = embedded estimate of ||x - y||.
    nested: repetitions of independent per-row, per-k scalings folded into a single
    max-product of top-k norms.
    """

    points: np.ndarray
    norm: SymmetricNorm
    spec: EmbeddingSpec
    mode: str
    r: float
    accept_factor: float
    trees: list
    oracles: list
    r_tree: float

    def __post_init__(self):
        self.true_oracle = norm_distance(self.norm)

    @property
    def threshold(self) -> float:
        return self.accept_factor * self.r

    def query(self, q) -> IndexReport:
        q = np.asarray(q, dtype=float)
        rep = IndexReport(None, None, reps=len(self.trees))
        cands = []
        for tree, oracle in zip(self.trees, self.oracles):
            out = query_ring_tree(tree, oracle, q)
            rep.evals += out.evals
            rep.nodes += out.nodes
            cands.append(out.candidate)
        return _accept(cands, self.true_oracle, q, self.points, self.threshold, rep)


def embedded_distance(spec: EmbeddingSpec) -> DistanceOracle:
    rows = spec.eval_rows.T * spec.scale

    def fn(X):
        xs = -np.sort(-np.abs(X), axis=-1)
        return np.max(xs @ rows, axis=-1)

    return DistanceOracle(fn, name="embedded")


def max_row_dual(spec: EmbeddingSpec) -> float:
    """max_i ||y_i||_* in the source norm's units (bounds D^ / ||.|| from above)."""
    unit, _ = normalized(spec.source_norm)
    return float(np.max(unit.dual(spec.eval_rows)))


def build_symnorm_index(points, norm: SymmetricNorm, p: LevelParams, mode: str = "direct", r: float = 1.0,
                        eps: float = 0.5, rng=None, accept_factor: float = 4.0, spec: EmbeddingSpec | None = None,
                        params: RandMapParams | None = None, reps: int = 4,
                        tree: TreeOptions | None = None, dual_tol: float = 0.02, seed: int = 0) -> SymNormIndex:
    """``spec`` may be passed to reuse an embedding built earlier."""
    P = np.asarray(points, dtype=float)
    spec = build_embedding(norm, p, dual_tol) if spec is None else spec
    tree = TreeOptions(eps=eps) if tree is None else tree
    # D^(x, y) <= ||x - y|| * max_i ||y_i||_*, so near points stay within r_tree
    r_tree = r * max_row_dual(spec)
    if mode == "direct":
        oracle = embedded_distance(spec)
        trees, oracles = [tree.build(P, oracle, r_tree, seed)], [oracle]
    elif mode == "nested":
        params = RandMapParams(0.3, 2.0, 2.0, seed) if params is None else params
        rows = spec.eval_rows
        coeffs = rows - np.concatenate([rows[:, 1:], np.zeros((len(rows), 1))], axis=1)
        # every row must keep the near point, so each row gets mu^(1/t)
        mu_row = params.mu ** (1.0 / len(rows))
        trees, oracles = [], []
        for i in range(reps):
            gen = make_rng(params.seed, i) if rng is None else rng
            u = -np.log1p(-gen.random(coeffs.shape)) / -math.log(mu_row)
            u = np.maximum(u, np.finfo(float).tiny)
            w = np.max(coeffs * spec.scale / u, axis=0)
            factors = [(k + 1, float(c)) for k, c in enumerate(w) if c > 0]
            oracle = max_product_distance(factors)
            trees.append(tree.build(P, oracle, r_tree, _tree_seed(seed, i)))
            oracles.append(oracle)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SymNormIndex(P, norm, spec, mode, float(r), float(accept_factor), trees, oracles, r_tree)
