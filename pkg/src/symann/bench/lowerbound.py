"""How well can one level-count G describe a norm? A distortion proxy across dimensions.

For a norm X (normalized so ||e_1|| = 1) the level-count G gives the estimate
g(x) = inf{lam > 0 : sum_i G(|x_i| / lam) <= 2 log_beta d}. Over the flat vectors
xi^(1..d) and the staircase (1, sqrt2 - 1, ..., sqrt d - sqrt(d - 1)) the proxy
is max(g / ||.||) / min(g / ||.||): the spread a single G cannot absorb into one
scale factor.

``fitted_proxy`` repeats the measurement with the G fitted exactly to the flat
vectors, G(t) = 1/k on (1/a_(k+1), 1/a_k] with a_k = ||xi^(k)|| and G = 0 below
1/a_d, at level 1. Every
flat vector is then estimated exactly, so only the staircase can move the ratio.
"""
from __future__ import annotations

import math

import numpy as np

from ..randmap import symmetric_G
from ..vecnorm import Lp, Minimal, normalized

NORMS = {"minimal_sqrt": Minimal.sqrt, "l2": lambda d: Lp(d, 2)}


def level_gauge(G, values, mult, level: float, iters: int = 200):
    """inf{lam : sum_j mult_j G(values_j / lam) <= level} per row, by log bisection.

    ``values`` and ``mult`` are (rows, m); each row is a run-length form of a vector.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    mult = np.broadcast_to(np.asarray(mult, dtype=float), values.shape)
    top = values.max(axis=1)
    if np.any(top <= 0):
        raise ValueError("every row needs a positive entry")
    lo = np.log(top) - 60.0
    hi = np.log(top) + 60.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = (mult * G(values / np.exp(mid)[:, None])).sum(axis=1) <= level
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.exp(hi)


class FlatFittedG:
    """Step function G(t) = 1/k on (1/a_(k+1), 1/a_k] for k < d and on [1/a_d, 1/a_(d-1)]
    at k = d; zero below 1/a_d and steep linear growth above 1/a_1."""

    def __init__(self, a):
        self.knots = 1.0 / np.asarray(a, dtype=float)  # decreasing
        self.d = len(self.knots)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        # number of knots >= t, i.e. the largest k with t <= 1/a_k
        k = np.searchsorted(-self.knots, -t, side="right")
        out = np.where(k > 0, 1.0 / np.maximum(k, 1), 0.0)
        out = np.where(t < self.knots[-1], 0.0, out)
        out = np.where(t > self.knots[0], 2.0 * self.d * t / self.knots[0], out)
        return np.where(t > 0, out, 0.0)


def staircase(d: int) -> np.ndarray:
    k = np.arange(1, d + 1, dtype=float)
    return np.sqrt(k) - np.sqrt(k - 1)


def distortion_proxy(norm, beta: float = 1.5, alpha: float = 2.0) -> dict:
    d = norm.dim
    unit, _ = normalized(norm)
    gspec = symmetric_G(norm, beta, alpha)
    level = gspec.level_bound
    ks = np.arange(1, d + 1, dtype=float)
    # flat vector xi^(k) is one value with multiplicity k
    g_flat = level_gauge(gspec.G, np.ones((d, 1)), ks[:, None], level)
    flat_norms = unit.norm(np.tril(np.ones((d, d)))) if d <= 1024 else np.array(
        [unit.norm(np.r_[np.ones(k), np.zeros(d - k)]) for k in range(1, d + 1)])
    st = staircase(d)
    g_st = level_gauge(gspec.G, st[None, :], np.ones((1, d)), level)
    ratios = np.concatenate([g_flat / flat_norms, g_st / unit.norm(st)])
    fit = FlatFittedG(flat_norms)
    f_flat = level_gauge(fit, np.ones((d, 1)), ks[:, None], 1.0)
    f_st = level_gauge(fit, st[None, :], np.ones((1, d)), 1.0)
    fitted = np.concatenate([f_flat / flat_norms, f_st / unit.norm(st)])
    return {
        "fitted_proxy": float(fitted.max() / fitted.min()),
        "d": d,
        "proxy": float(ratios.max() / ratios.min()),
        "min_ratio": float(ratios.min()),
        "max_ratio": float(ratios.max()),
        "staircase_ratio": float(g_st[0] / unit.norm(st)),
    }


def lowerbound_demo(dims, norm: str = "minimal_sqrt", beta: float = 1.5, alpha: float = 2.0) -> list[dict]:
    """One row per dimension; ``dims`` must be ascending powers of two."""
    dims = [int(d) for d in dims]
    if not dims:
        raise ValueError("need at least one dimension")
    if any(d < 2 or d & (d - 1) for d in dims):
        raise ValueError("dimensions must be powers of two >= 2")
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError("dimensions must be strictly ascending")
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {sorted(NORMS)}")
    rows = []
    for d in dims:
        row = distortion_proxy(NORMS[norm](d), beta, alpha)
        row["norm"] = norm
        row["log2_d"] = int(math.log2(d))
        rows.append(row)
    return rows


def format_table(rows) -> str:
    lines = ["norm              d      proxy  min_ratio  max_ratio  fitted_proxy"]
    for r in rows:
        lines.append(f"{r['norm']:<13} {r['d']:>5}  {r['proxy']:9.6f}  {r['min_ratio']:9.6f}  {r['max_ratio']:9.6f}"
                     f"  {r['fitted_proxy']:12.6f}")
    return "\n".join(lines) + "\n"
