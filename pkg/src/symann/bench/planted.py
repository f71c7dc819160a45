"""Planted near neighbor instances with a verified unique near point per query."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..annindex.oracle import exact_scan, norm_distance
from ..randmap import make_rng
from ..vecnorm import SymmetricNorm


class RejectionBudgetExceeded(RuntimeError):
    pass


@dataclass
class PlantedInstance:
    """Points, queries, and for each query the id of its planted neighbor.

    Every other point lies at distance >= sep * r from each query.
    """

    points: np.ndarray
    queries: np.ndarray
    planted: np.ndarray
    r: float
    sep: float

    @property
    def query(self) -> np.ndarray:
        return self.queries[0]

    @property
    def planted_id(self) -> int:
        return int(self.planted[0])

    def check(self, norm: SymmetricNorm) -> bool:
        """Exact scan finds each planted point as the unique point within sep * r."""
        oracle = norm_distance(norm)
        lim = self.sep * self.r * (1 - 1e-9)
        for q, pid in zip(self.queries, self.planted):
            scan = exact_scan(self.points, oracle, q)
            if scan.candidate != pid or scan.distance > self.r * (1 + 1e-9):
                return False
            if np.sum(_closer_than(norm, self.points - q, lim)) != 1:
                return False
        return True


def _closer_than(norm, X, lim):
    """Rows with ||x|| < lim, evaluating the norm only where cheap lower bounds allow it.

    For a symmetric norm ||x|| >= ||x||_inf ||e_1|| and ||x|| >= (||x||_1 / d) ||1||.
    """
    A = np.abs(X)
    d = X.shape[-1]
    lower = np.maximum(A.max(axis=1) * norm.unit_value, A.sum(axis=1) / d * float(norm.norm(np.ones(d))))
    out = np.zeros(len(X), dtype=bool)
    idx = np.flatnonzero(lower < lim)
    if idx.size:
        out[idx] = norm.norm(X[idx]) < lim
    return out


def _unit_directions(norm, d, m, rng):
    z = rng.standard_normal((m, d))
    return z / norm.norm(z)[:, None]


def gen_planted(norm: SymmetricNorm, n: int, d: int, r: float, sep: float, seed: int,
                n_queries: int = 1, spread: float = 4.0, max_tries: int = 100) -> PlantedInstance:
    """Background points are Gaussian, scaled so their typical distance from a query is
    ``spread * sep * r``; any drawn point within sep * r of some query (or of another
    query's planted point zone) is redrawn. Each planted point sits at distance exactly r
    from its query. The planted points take ids 0, n/m, 2n/m, ...
    """
    if not sep > 1:
        raise ValueError("separation must exceed 1")
    if d != norm.dim:
        raise ValueError("dimension mismatch")
    if not 1 <= n_queries <= n:
        raise ValueError("need 1 <= n_queries <= n")
    if not r > 0:
        raise ValueError("r must be positive")
    rng = make_rng(seed, 0)
    g = rng.standard_normal((4096, d))
    sigma = spread * sep * r / float(np.median(norm.norm(g)))
    lim = sep * r

    # queries pairwise at distance >= 2 sep r + r keep each planted point away from other queries
    queries = np.empty((0, d))
    tries = 0
    while len(queries) < n_queries:
        cand = sigma * rng.standard_normal((n_queries, d))
        for c in cand:
            if len(queries) == n_queries:
                break
            if len(queries) == 0 or not np.any(_closer_than(norm, queries - c, 2 * lim + r)):
                queries = np.vstack([queries, c])
        tries += 1
        if tries > max_tries:
            raise RejectionBudgetExceeded(f"placed {len(queries)} of {n_queries} queries after {tries} rounds")
    planted_pts = queries + r * _unit_directions(norm, d, n_queries, rng)

    m = n - n_queries
    bg = np.empty((0, d))
    tries = 0
    while len(bg) < m:
        cand = sigma * rng.standard_normal((2 * (m - len(bg)) + 16, d))
        near = np.zeros(len(cand), dtype=bool)
        for q in queries:
            near |= _closer_than(norm, cand - q, lim)
        bg = np.vstack([bg, cand[~near]])[:m]
        tries += 1
        if tries > max_tries:
            raise RejectionBudgetExceeded(
                f"kept {len(bg)} of {m} background points after {tries} rounds; increase spread"
            )

    ids = np.floor(np.arange(n_queries) * n / n_queries).astype(int)
    points = np.empty((n, d))
    mask = np.ones(n, dtype=bool)
    mask[ids] = False
    points[ids] = planted_pts
    points[mask] = bg
    inst = PlantedInstance(points, queries, ids, float(r), float(sep))
    if not inst.check(norm):
        raise RuntimeError("planted instance failed its own verification")
    return inst
