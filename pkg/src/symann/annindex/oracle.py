"""Distance oracles over point arrays and the exact-scan baseline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..vecnorm import SymmetricNorm, sorted_abs


@dataclass
class IndexReport:
    """Outcome of one query. ``distance`` is measured with the source norm."""

    candidate: int | None
    distance: float | None
    evals: int = 0
    nodes: int = 0
    reps: int = 0

    def __post_init__(self):
        if min(self.evals, self.nodes, self.reps) < 0:
            raise ValueError("counters must be non-negative")


class DistanceOracle:
    """Distance d(a, b) = f(a - b) for a vectorized seminorm-like map f on rows.

    ``many(q, X)`` returns the distances from q to every row of X and bumps the
    evaluation counter by ``len(X)``.
    """

    def __init__(self, fn, is_metric: bool = True, cost: float = 1.0, name: str = "distance"):
        self._fn = fn
        self.is_metric = is_metric
        self.cost = float(cost)
        self.name = name
        self.evals = 0

    def many(self, q, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self.evals += len(X)
        return np.asarray(self._fn(X - np.asarray(q, dtype=float)), dtype=float).reshape(len(X))

    def __call__(self, a, b) -> float:
        return float(self.many(a, np.asarray(b, dtype=float)[None, :])[0])

    def check(self, points, rng, trials: int = 1000, rtol: float = 1e-9) -> dict:
        """Sample symmetry, identity and (when flagged) the triangle inequality."""
        P = np.asarray(points, dtype=float)
        idx = rng.integers(0, len(P), size=(trials, 3))
        a, b, c = P[idx[:, 0]], P[idx[:, 1]], P[idx[:, 2]]
        ab = self._fn(a - b)
        ba = self._fn(b - a)
        out = {
            "symmetry": int(np.sum(np.abs(ab - ba) > rtol * np.maximum(1.0, ab))),
            "identity": int(np.sum(np.abs(self._fn(a - a)) > 0)),
            "triangle": 0,
        }
        if self.is_metric:
            ac, cb = self._fn(a - c), self._fn(c - b)
            out["triangle"] = int(np.sum(ab > (ac + cb) * (1 + rtol) + 1e-12))
        return out


def norm_distance(norm: SymmetricNorm) -> DistanceOracle:
    return DistanceOracle(norm.norm, name=repr(norm))


def linf_distance() -> DistanceOracle:
    return DistanceOracle(lambda X: np.max(np.abs(X), axis=-1), name="linf")


def max_product_distance(factors, blocks: int | None = None) -> DistanceOracle:
    """max_k c_k * T(k_i) over factors (k_i, c_i).

    With ``blocks`` set, each row is split into that many equal blocks and factor
    i acts on block i; otherwise every factor acts on the whole vector.
    """
    ks, cs = _factor_arrays(factors, blocks)

    def fn(X):
        if blocks is None:
            pref = np.cumsum(sorted_abs(X), axis=-1)
            return np.max(pref[..., ks - 1] * cs, axis=-1)
        Xb = X.reshape(X.shape[:-1] + (blocks, -1))
        pref = np.cumsum(sorted_abs(Xb), axis=-1)
        vals = pref[..., np.arange(blocks), ks - 1]
        return np.max(vals * cs, axis=-1)

    return DistanceOracle(fn, name="max-product")


def sum_product_distance(factors, blocks: int | None = None) -> DistanceOracle:
    """sum_k c_k * T(k_i), blockwise like :func:`max_product_distance`."""
    ks, cs = _factor_arrays(factors, blocks)

    def fn(X):
        if blocks is None:
            pref = np.cumsum(sorted_abs(X), axis=-1)
            return np.sum(pref[..., ks - 1] * cs, axis=-1)
        Xb = X.reshape(X.shape[:-1] + (blocks, -1))
        pref = np.cumsum(sorted_abs(Xb), axis=-1)
        vals = pref[..., np.arange(blocks), ks - 1]
        return np.sum(vals * cs, axis=-1)

    return DistanceOracle(fn, name="sum-product")


def _factor_arrays(factors, blocks=None):
    ks = np.array([int(k) for k, _ in factors], dtype=np.int64)
    cs = np.array([float(c) for _, c in factors])
    if len(ks) == 0 or np.any(ks < 1):
        raise ValueError("factors need k >= 1")
    if np.any(cs < 0) or not np.any(cs > 0):
        raise ValueError("factor weights must be non-negative with at least one positive")
    if blocks is not None and len(ks) != blocks:
        raise ValueError("blockwise products need one factor per block")
    return ks, cs


def exact_scan(points, oracle: DistanceOracle, q) -> IndexReport:
    """Exact nearest point; ties go to the smallest id."""
    P = np.asarray(points, dtype=float)
    if len(P) == 0:
        raise ValueError("exact scan over an empty point set")
    dist = oracle.many(q, P)
    i = int(np.argmin(dist))
    return IndexReport(i, float(dist[i]), evals=len(P), nodes=1, reps=1)
