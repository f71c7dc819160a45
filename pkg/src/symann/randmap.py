"""Randomized coordinate scalings that embed Orlicz-type norms into l_inf.

A scaling vector u has i.i.d. entries with Pr[u_i <= t] = 1 - mu^G(t); the map
f(x) = (x_1/u_1, ..., x_d/u_d) keeps a unit vector inside the unit l_inf ball with
probability at least mu, and pushes a long vector outside the D-ball with
probability at least 1 - mu^alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gfunc import GFunction, LevelTableG, Power, StepLinear
from .leveling import LevelParams
from .vecnorm import SymmetricNorm, flat_vector, normalized

__all__ = [
    "DegenerateNormError",
    "RandMapParams",
    "ScalingVector",
    "SymmetricGSpec",
    "make_rng",
    "scalings_from_uniform",
    "sample_scalings",
    "apply_map",
    "topk_G",
    "symmetric_G",
    "product_l1_scalings",
    "level_thresholds",
]


class DegenerateNormError(ValueError):
    """Every level threshold is infinite, so the level-count G carries no information."""


@dataclass(frozen=True)
class RandMapParams:
    mu: float
    D: float
    alpha: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.mu < 0.5:
            raise ValueError("mu must lie in (0, 1/2)")
        if not self.D > 1.0:
            raise ValueError("D must exceed 1")
        if not self.alpha > 1.0:
            raise ValueError("alpha must exceed 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ScalingVector:
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1 or not np.all(u > 0):
            raise ValueError("scalings must be a 1-d array of positive divisors")
        object.__setattr__(self, "u", u)

    def __len__(self):
        return len(self.u)


def make_rng(seed: int, *stream) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, *stream).

    Each (seed, repetition, ...) tuple names an independent stream, so results do
    not depend on the order in which repetitions are built.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def scalings_from_uniform(G: GFunction, mu: float, p):
    """u = inf{t : G(t) >= log_mu(1 - p)} for p in [0, 1).

    Probability mass below a jump of G lands on the jump point.
    """
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p >= 1)):
        raise ValueError("p must lie in [0, 1)")
    # log1p keeps g > 0 for tiny positive p; p = 0 is nudged to the smallest normal
    g = np.log1p(-np.maximum(p, np.finfo(float).tiny)) / math.log(mu)
    g = np.maximum(g, np.finfo(float).tiny)
    if isinstance(G, Power):
        u = np.power(g, 1.0 / G.p)
    else:
        u = G.inverse(g)
    return np.maximum(u, np.finfo(float).tiny)


def sample_scalings(G: GFunction, params: RandMapParams, d: int, rng=None, rep: int = 0) -> ScalingVector:
    """Draw d i.i.d. divisors with CDF 1 - mu^G(t).

    Without an explicit ``rng`` the stream is (params.seed, rep); coordinate i uses
    the i-th draw of that stream.
    """
    if rng is None:
        rng = make_rng(params.seed, rep)
    p = rng.random(d)
    return ScalingVector(scalings_from_uniform(G, params.mu, p))


def apply_map(x, u: ScalingVector):
    """f(x) = x / u coordinate-wise; works on a batch of rows too."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(u):
        raise ValueError("dimension mismatch")
    return x / u.u


def topk_G(k: int, d: int) -> StepLinear:
    """G(t) = t for t >= 1/k, else 0."""
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in [1, {d}]")
    return StepLinear(1.0 / k)


def level_thresholds(norm: SymmetricNorm, beta: float, n_levels: int) -> np.ndarray:
    """L_k = min{j : ||beta^-k xi^(j)|| > 1} by binary search over j (inf if none)."""
    d = norm.dim
    out = np.full(n_levels, np.inf)
    cache = {}

    def value(j):
        if j not in cache:
            cache[j] = float(norm.norm(flat_vector(j, d)))
        return cache[j]

    for k in range(n_levels):
        scale = beta**-k
        if value(d) * scale <= 1.0:
            continue
        lo, hi = 0, d  # value(lo) * scale <= 1 < value(hi) * scale, value(0) = 0
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if value(mid) * scale > 1.0:
                hi = mid
            else:
                lo = mid
        out[k] = hi
    return out


@dataclass(frozen=True)
class SymmetricGSpec:
    """Level thresholds L_k and the level-count function G built from them."""

    L: np.ndarray
    beta: float
    alpha: float
    d: int
    factor: float
    G: LevelTableG
    shifted: bool = False

    @property
    def level_bound(self) -> float:
        return LevelParams(self.beta, self.d).level_bound

    @property
    def degenerate(self) -> bool:
        return not np.any(np.isfinite(self.L))

    def rescaled_G(self) -> GFunction:
        """G / (2 log_beta d), for use with the Orlicz-style map."""
        from .gfunc import ScaledG

        return ScaledG(self.G, 1.0 / self.level_bound)


def symmetric_G(norm: SymmetricNorm, beta: float, alpha: float, d: int | None = None,
                shifted: bool = False) -> SymmetricGSpec:
    """G(t) = sum_k [t in (beta^-(k+1), beta^-k]] / L_k + alpha * K * t * [t > 1], K = 2 log_beta d.

    The norm is rescaled internally so that the first basis vector has norm 1;
    the applied factor is recorded.

    A coordinate at level k is at most beta^-k but may be just above beta^-(k+1), so
    ||x|| <= 1 only bounds the level-k count by L_(k+1), not L_k (top-3 has
    L_2 = 3 but L_3 = inf). ``shifted=True`` weights level k by 1 / L_(k+1), which
    makes sum G(|x_i|) <= K hold for every ||x|| <= 1.
    """
    d = norm.dim if d is None else d
    if d != norm.dim:
        raise ValueError("dimension mismatch")
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    unit, factor = normalized(norm)
    lp = LevelParams(beta, d)
    if shifted:
        L = level_thresholds(unit, beta, lp.n_levels + 1)[1:]
    else:
        L = level_thresholds(unit, beta, lp.n_levels)
    G = LevelTableG(beta, L, alpha * lp.level_bound)
    return SymmetricGSpec(L, beta, alpha, d, factor, G, shifted)


def product_l1_scalings(mu: float, m: int, rng) -> ScalingVector:
    """Per-factor divisors with Pr[u <= t] = 1 - mu^t (the l_1 case G(t) = t)."""
    if m < 1:
        raise ValueError("need at least one factor")
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    return ScalingVector(scalings_from_uniform(Power(1.0), mu, rng.random(m)))
