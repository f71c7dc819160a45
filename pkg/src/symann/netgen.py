"""Net-based linear embedding of a symmetric norm into a max of top-k combinations.

For every non-increasing y >= 0 the maximal seminorm <x*, y> is a non-negative
combination of top-k norms with weights c_k = y_k - y_(k+1). A symmetric norm is
approximated by the max of such seminorms over a finite set of rounded dual
vectors. Those vectors are enumerated in count space (one count per level).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .leveling import LevelParams, simplify_counts
from .vecnorm import SymmetricNorm, catalog, norm_from_dict, normalized, sorted_abs

__all__ = [
    "EnumerationBudgetExceeded",
    "RoundedDualCandidate",
    "RoundedDualSet",
    "EmbeddingSpec",
    "maximal_seminorm_eval",
    "coeffs_from_net_vector",
    "materialize_counts",
    "enumerate_rounded_dual_set",
    "build_embedding",
    "embedded_eval",
    "net_size_report",
]

SCHEMA = "symann.embedding/1"
DEFAULT_NODE_BUDGET = 50_000_000
CHUNK = 100_000


class EnumerationBudgetExceeded(RuntimeError):
    pass


def maximal_seminorm_eval(y, x):
    """<x*, y> for non-increasing non-negative y."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("dimension mismatch")
    _check_profile(y)
    return sorted_abs(x) @ y


def _check_profile(y):
    if np.any(y < 0) or np.any(np.diff(y) > 0):
        raise ValueError("y must be non-negative and non-increasing")


def coeffs_from_net_vector(y) -> np.ndarray:
    """c_k = y_k - y_(k+1) with y_(d+1) = 0."""
    y = np.asarray(y, dtype=float)
    _check_profile(y)
    return y - np.append(y[1:], 0.0)


def materialize_counts(counts, p: LevelParams) -> np.ndarray:
    """Rows of per-level counts -> rows of non-increasing vectors of length d."""
    counts = np.atleast_2d(np.asarray(counts, dtype=np.int64))
    cum = np.cumsum(counts, axis=1)
    if cum.size and cum[:, -1].max(initial=0) > p.d:
        raise ValueError("counts exceed dimension")
    # position i lies in level k iff cum[k-1] <= i < cum[k]; past the last level it is zero
    idx = (np.arange(p.d)[None, None, :] >= cum[:, :, None]).sum(axis=1)
    vals = np.append(np.power(p.beta, -np.arange(counts.shape[1], dtype=float)), 0.0)
    return vals[idx]


@dataclass(frozen=True)
class RoundedDualCandidate:
    counts: tuple

    def vector(self, p: LevelParams) -> np.ndarray:
        return materialize_counts(np.array(self.counts), p)[0]


@dataclass
class RoundedDualSet:
    """Enumerated count patterns (one row per pattern, canonical lexicographic order)."""

    counts: np.ndarray
    params: LevelParams
    nodes: int
    scale: float

    def __len__(self):
        return len(self.counts)

    def __iter__(self):
        for row in self.counts:
            yield RoundedDualCandidate(tuple(int(v) for v in row))

    def vectors(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        return materialize_counts(self.counts[start:stop], self.params)

    def chunks(self, size: int = CHUNK):
        for s in range(0, len(self.counts), size):
            yield self.vectors(s, s + size)


def _batch_dual(norm: SymmetricNorm, Z, tol):
    out = norm._dual_sorted(Z)
    if out is not None:
        return np.asarray(out)
    return np.array([norm._dual_numeric(z, tol) for z in Z])


def _enumerate(norm, p: LevelParams, bound, tol, fixed_points, node_budget):
    L = p.n_levels
    vals = [int(v) for v in p.count_values() if v > 0]
    dtype = np.uint8 if p.d < 256 else np.uint16
    states = np.zeros((1, L), dtype=dtype)
    sums = np.zeros(1, dtype=np.int64)
    nodes = 1
    off = p.window_offset
    for k in range(L):
        top = math.ceil(k - off)
        window = states[:, :top].max(axis=1).astype(np.int64) if top > 0 else np.zeros(len(states), np.int64)
        kids, kid_sums = [], []
        for v in vals:
            ok = sums + v <= p.d
            if fixed_points:
                ok &= v > window
            sel = np.flatnonzero(ok)
            if sel.size == 0:
                continue
            nodes += sel.size
            if nodes > node_budget:
                raise EnumerationBudgetExceeded(
                    f"enumeration exceeded {node_budget} nodes at level {k} (d={p.d}, beta={p.beta})"
                )
            for s in range(0, sel.size, CHUNK):
                part = sel[s : s + CHUNK]
                child = states[part].copy()
                child[:, k] = v
                dual = _batch_dual(norm, materialize_counts(child, p), tol)
                keep = dual <= bound
                kids.append(child[keep])
                kid_sums.append(sums[part][keep] + v)
        if kids:
            states = np.concatenate([states] + kids)
            sums = np.concatenate([sums] + kid_sums)
    order = np.lexsort(states.T[::-1])
    return states[order], nodes


def enumerate_rounded_dual_set(
    norm: SymmetricNorm,
    p: LevelParams,
    dual_tol: float = 0.02,
    node_budget: int = DEFAULT_NODE_BUDGET,
    fixed_points_only: bool = False,
) -> RoundedDualSet:
    """All valid count patterns z (zero included) with ||z||_* <= beta^2 (1 + dual_tol).

    The norm is first rescaled so that the first basis vector has norm 1; the
    recorded ``scale`` maps seminorm values back to the original norm. Patterns are
    grown level by level, and a partial pattern whose dual norm already exceeds the
    bound is pruned since adding entries never lowers the dual norm.
    ``fixed_points_only`` keeps only patterns with S(z) = z.
    """
    if norm.dim != p.d:
        raise ValueError("norm and level parameters disagree on d")
    if not dual_tol >= 0:
        raise ValueError("dual_tol must be non-negative")
    unit, scale = normalized(norm)
    bound = p.beta**2 * (1.0 + dual_tol)
    counts, nodes = _enumerate(unit, p, bound, max(dual_tol, 1e-9) * 0.1, fixed_points_only, node_budget)
    return RoundedDualSet(counts, p, nodes, 1.0 / scale)


@dataclass
class EmbeddingSpec:
    """Net rows y^(i) (as level counts and vectors), their top-k coefficients, and metadata."""

    params: LevelParams
    source_norm: SymmetricNorm
    dual_tol: float
    scale: float
    net_counts: np.ndarray
    rhat_size: int | None = None
    nodes: int = 0
    net: np.ndarray = field(init=False, repr=False)
    coeffs: np.ndarray = field(init=False, repr=False)
    _eval_rows: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.net_counts = np.asarray(self.net_counts, dtype=np.int64)
        if len(self.net_counts) == 0:
            raise ValueError("an embedding needs at least one net vector")
        self.net = materialize_counts(self.net_counts, self.params)
        self.coeffs = self.net - np.concatenate([self.net[:, 1:], np.zeros((len(self.net), 1))], axis=1)
        self._eval_rows = _pareto_rows(self.net)

    @property
    def t(self) -> int:
        return len(self.net)

    @property
    def dim(self) -> int:
        return self.params.d

    @property
    def eval_rows(self) -> np.ndarray:
        """Net rows that can attain the max (others are dominated in every prefix sum)."""
        return self._eval_rows

    def distortion_bounds(self) -> tuple[float, float]:
        """(lower, upper) factors guaranteed for unit vectors by the net construction."""
        beta, d, tau = self.params.beta, self.params.d, self.params.tau
        gamma = 8.0 * (beta - 1.0)
        return 1.0 - gamma - tau * d, (beta**2) * (1.0 + self.dual_tol) + gamma

    def to_json(self) -> str:
        data = {
            "schema": SCHEMA,
            "beta": self.params.beta,
            "d": self.params.d,
            "tau": self.params.tau,
            "dual_tol": self.dual_tol,
            "scale": self.scale,
            "source_norm": self.source_norm.to_dict(),
            "rhat_size": self.rhat_size,
            "nodes": self.nodes,
            "net_counts": self.net_counts.tolist(),
            "coeffs": self.coeffs.tolist(),
        }
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EmbeddingSpec":
        data = json.loads(text)
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported embedding schema {data.get('schema')!r}")
        spec = cls(
            LevelParams(data["beta"], data["d"], data["tau"]),
            norm_from_dict(data["source_norm"]),
            data["dual_tol"],
            data["scale"],
            np.array(data["net_counts"], dtype=np.int64),
            data["rhat_size"],
            data["nodes"],
        )
        if not np.array_equal(spec.coeffs, np.array(data["coeffs"])):
            raise ValueError("stored coefficients do not match the net counts")
        return spec


def _pareto_rows(Y, block: int = 2048) -> np.ndarray:
    """Rows of Y whose prefix sums are not dominated by another row's.

    <x*, y> = sum_k (x*_k - x*_(k+1)) * prefix_k(y) with non-negative weights, so a
    dominated row never attains the max. Rows are visited by decreasing total
    prefix mass; a dominating row always has a larger total, so comparing against
    the frontier built so far is enough.
    """
    P = np.cumsum(Y, axis=1)
    order = np.argsort(-P.sum(axis=1), kind="stable")
    frontier = np.empty((0, P.shape[1]))
    kept = []

    def dominated(cand, by):
        if len(by) == 0:
            return np.zeros(len(cand), dtype=bool)
        ge = np.all(by[None, :, :] >= cand[:, None, :], axis=2)
        gt = np.any(by[None, :, :] > cand[:, None, :], axis=2)
        return np.any(ge & gt, axis=1)

    for s in range(0, len(order), block):
        idx = order[s : s + block]
        cand = P[idx]
        alive = ~dominated(cand, frontier)
        idx, cand = idx[alive], cand[alive]
        alive = ~dominated(cand, cand)
        kept.append(idx[alive])
        frontier = np.concatenate([frontier, cand[alive]])
    keep = np.sort(np.concatenate(kept)) if kept else np.array([], dtype=int)
    return Y[keep]


def build_embedding(
    norm: SymmetricNorm,
    p: LevelParams,
    dual_tol: float = 0.02,
    node_budget: int = DEFAULT_NODE_BUDGET,
    method: str = "fixed_points",
) -> EmbeddingSpec:
    """Net N = {S(z) : z in R-hat} minus the zero vector.

    ``method="image"`` enumerates R-hat and deduplicates S(z) by count pattern.
    ``method="fixed_points"`` enumerates {z in R-hat : S(z) = z} directly; the two
    sets coincide because S only removes mass, so S(z) stays in R-hat, and S is
    idempotent.
    """
    if method == "image":
        rhat = enumerate_rounded_dual_set(norm, p, dual_tol, node_budget)
        net = np.unique(simplify_counts(rhat.counts.astype(np.int64), p), axis=0)
        rhat_size, nodes, scale = len(rhat), rhat.nodes, rhat.scale
    elif method == "fixed_points":
        fx = enumerate_rounded_dual_set(norm, p, dual_tol, node_budget, fixed_points_only=True)
        net = fx.counts.astype(np.int64)
        rhat_size, nodes, scale = None, fx.nodes, fx.scale
    else:
        raise ValueError(f"unknown method {method!r}")
    net = net[net.sum(axis=1) > 0]
    return EmbeddingSpec(p, norm, dual_tol, scale, net, rhat_size, nodes)


def embedded_eval(spec: EmbeddingSpec, x):
    """scale * max_i sum_k c_(i,k) ||x||_T(k), evaluated as max_i <x*, y^(i)>."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.dim:
        raise ValueError("dimension mismatch")
    xs = sorted_abs(x)
    return spec.scale * np.max(xs @ spec.eval_rows.T, axis=-1)


def net_size_report(norm, dims, beta: float, dual_tol: float = 0.02, node_budget: int = DEFAULT_NODE_BUDGET,
                    with_rhat: bool = False):
    """Rows ``{d, rhat, t, nodes, error}`` per dimension.

    ``norm`` is a catalog name or a callable mapping d to a norm. ``rhat`` is the
    size of R-hat (enumerated only when ``with_rhat``).
    """
    make = (lambda d: catalog(d)[norm]) if isinstance(norm, str) else norm
    rows = []
    for d in dims:
        p = LevelParams(beta, d)
        row = {"d": d, "rhat": None, "t": None, "nodes": None, "error": None}
        try:
            spec = build_embedding(make(d), p, dual_tol, node_budget)
            row.update(t=spec.t, nodes=spec.nodes)
            if with_rhat:
                row["rhat"] = len(enumerate_rounded_dual_set(make(d), p, dual_tol, node_budget))
        except EnumerationBudgetExceeded as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows
