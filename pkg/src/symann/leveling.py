"""Vector rounding: levels, small-coordinate cut C, level vector V, rounded counts W,
the composite R = W o V o C, and the simplified rounded vector S.

Level k holds the coordinates with beta^-(k+1) < |x_i| <= beta^-k. Rounded and
simplified vectors are fully described by their per-level counts, so most of the
work happens in "count space": an integer array ``counts[k]`` for levels
``0 <= k < n_levels``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._levels import GUARD, level_of

__all__ = [
    "LevelRangeError",
    "LevelParams",
    "LevelProfile",
    "levels",
    "cut_small",
    "level_vector",
    "rounded_counts",
    "rounded",
    "simplify",
    "counts_to_vector",
    "vector_to_counts",
    "simplify_counts",
]

# beyond this |k| the level tops beta^-k stop being comfortably representable
MAX_ABS_LEVEL = 1000


class LevelRangeError(ValueError):
    """A coordinate is too large or too small for a representable level."""


@dataclass(frozen=True)
class LevelParams:
    """beta in (1, 2), dimension d, cutoff tau (default beta / d^2)."""

    beta: float
    d: int
    tau: float | None = None

    def __post_init__(self):
        if not 1.0 < self.beta < 2.0:
            raise ValueError(f"beta must lie in (1, 2), got {self.beta}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.tau is None:
            # beta/d^2 is >= 1 at d = 1; fall back to the bottom of level 0 there
            default = self.beta / self.d**2 if self.d >= 2 else 1.0 / self.beta
            object.__setattr__(self, "tau", default)
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")

    @classmethod
    def with_linear_tau(cls, beta: float, d: int) -> "LevelParams":
        """The alternative coupling tau = beta / d."""
        return cls(beta, d, beta / d if d >= 2 else 1.0 / beta)

    @property
    def level_bound(self) -> float:
        """Real bound K on level indices: levels 0 <= k < K are kept.

        K = 2 log_beta d, raised to 1 so that d = 1 keeps level 0.
        """
        return max(2.0 * math.log(self.d) / math.log(self.beta), 1.0)

    @property
    def n_levels(self) -> int:
        """Number of integer levels k with 0 <= k < level_bound."""
        return int(math.ceil(self.level_bound - 1e-12))

    @property
    def window_offset(self) -> float:
        """3 log_beta(1 / (beta - 1)); S compares level k with levels j < k - offset."""
        return 3.0 * math.log(1.0 / (self.beta - 1.0)) / math.log(self.beta)

    def level_values(self) -> np.ndarray:
        return np.power(self.beta, -np.arange(self.n_levels, dtype=float))

    def rounded_count(self, b):
        """floor(beta^j) for the integer j >= 0 with beta^(j-1) < b <= beta^j."""
        b = np.asarray(b, dtype=float)
        with np.errstate(divide="ignore"):
            exact = np.log(np.maximum(b, 1.0)) / math.log(self.beta)
        j = np.ceil(exact - GUARD * np.maximum(1.0, exact))
        out = np.floor(np.power(self.beta, j) * (1.0 + 1e-12))
        return np.where(b > 0, out, 0.0).astype(np.int64)

    def count_values(self) -> np.ndarray:
        """Sorted distinct values floor(beta^j) that do not exceed d, plus 0."""
        vals = {0}
        j = 0
        while True:
            v = int(math.floor(self.beta**j * (1.0 + 1e-12)))
            if v > self.d:
                break
            vals.add(v)
            j += 1
        return np.array(sorted(vals), dtype=np.int64)


@dataclass
class LevelProfile:
    """Per-level counts b_k (only non-zero counts recorded)."""

    counts: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, k: int) -> int:
        return self.counts.get(k, 0)

    def to_text(self) -> str:
        """One ``level count`` pair per line, ascending level."""
        return "\n".join(f"{k} {b}" for k, b in sorted(self.counts.items()))

    @classmethod
    def from_text(cls, text: str) -> "LevelProfile":
        counts = {}
        for line in text.strip().splitlines():
            k, b = line.split()
            counts[int(k)] = int(b)
        return cls(counts)


def _levels_of(x, beta: float) -> np.ndarray:
    a = np.abs(np.asarray(x, dtype=float))
    nz = a[a > 0]
    lev = level_of(nz, beta)
    if nz.size and (np.any(np.abs(lev) > MAX_ABS_LEVEL) or not np.all(np.isfinite(lev))):
        raise LevelRangeError("coordinate magnitude outside the representable level range")
    return lev.astype(np.int64)


def levels(x, p: LevelParams) -> LevelProfile:
    """Level profile of x; zeros are not counted."""
    lev = _levels_of(x, p.beta)
    ks, bs = np.unique(lev, return_counts=True)
    return LevelProfile({int(k): int(b) for k, b in zip(ks, bs)})


def cut_small(x, p: LevelParams) -> np.ndarray:
    """C(x): zero every coordinate with |x_i| < tau."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) >= p.tau, x, 0.0)


def level_vector(x, p: LevelParams) -> np.ndarray:
    """V(x): each non-zero |x_i| rounded up to its level top, sorted non-increasing."""
    x = np.asarray(x, dtype=float)
    lev = np.sort(_levels_of(x, p.beta))
    out = np.zeros(x.shape[-1])
    out[: lev.size] = np.power(p.beta, -lev.astype(float))
    return out


def rounded_counts(v, p: LevelParams) -> np.ndarray:
    """W(v) for a level vector v.

    Levels 0 <= k < K are visited in order; level k with b_k > 0 contributes
    floor(beta^j) entries (beta^(j-1) < b_k <= beta^j) if the remaining
    capacity allows, otherwise it is skipped. Other levels are dropped.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or np.any(np.diff(v) > 0):
        raise ValueError("a level vector is non-negative and non-increasing")
    lev = _levels_of(v, p.beta)
    nz = v[v > 0]
    if nz.size and not np.allclose(nz, np.power(p.beta, -lev.astype(float)), rtol=1e-9, atol=0):
        raise ValueError("level vector entries must be powers of beta")
    counts = np.zeros(p.n_levels, dtype=np.int64)
    keep = (lev >= 0) & (lev < p.n_levels)
    np.add.at(counts, lev[keep], 1)
    return counts_to_vector(_round_counts(counts, p), p)


def _round_counts(counts, p: LevelParams) -> np.ndarray:
    want = p.rounded_count(counts)
    out = np.zeros_like(want)
    cap = p.d
    for k in range(len(want)):
        n = int(want[k])
        if n > 0 and cap >= n:
            out[k] = n
            cap -= n
    return out


def rounded(x, p: LevelParams) -> np.ndarray:
    """R(x) = W(V(C(x)))."""
    return rounded_counts(level_vector(cut_small(x, p), p), p)


def simplify(z, p: LevelParams) -> np.ndarray:
    """S(z) for a rounded-counts vector z."""
    z = np.asarray(z, dtype=float)
    return counts_to_vector(simplify_counts(vector_to_counts(z, p), p), p)


def simplify_counts(counts, p: LevelParams) -> np.ndarray:
    """S in count space; accepts a single count row or a 2-d batch of rows.

    Sweeping k upward, level k is zeroed when b_k <= max of the current counts at
    levels j < k - window_offset. Earlier counts are final by the time k is
    reached, so the result is a fixed point of the sweep.
    """
    c = np.array(counts, copy=True)
    single = c.ndim == 1
    if single:
        c = c[None, :]
    off = p.window_offset
    n = c.shape[1]
    for k in range(n):
        # window is the integer levels j with 0 <= j < k - off
        top = math.ceil(k - off)
        if top <= 0:
            continue
        window = c[:, :top].max(axis=1)
        drop = (c[:, k] > 0) & (c[:, k] <= window)
        c[drop, k] = 0
    return c[0] if single else c


def counts_to_vector(counts, p: LevelParams) -> np.ndarray:
    """Materialize per-level counts as the non-increasing vector of length d."""
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total > p.d:
        raise ValueError(f"counts sum to {total} > d = {p.d}")
    vals = np.repeat(np.power(p.beta, -np.arange(len(counts), dtype=float)), counts)
    out = np.zeros(p.d)
    out[:total] = vals
    return out


def vector_to_counts(z, p: LevelParams) -> np.ndarray:
    """Per-level counts of a vector whose non-zero entries sit in levels 0..n_levels-1."""
    lev = _levels_of(z, p.beta)
    if lev.size and (lev.min() < 0 or lev.max() >= p.n_levels):
        raise ValueError("vector has entries outside the kept level range")
    counts = np.zeros(p.n_levels, dtype=np.int64)
    np.add.at(counts, lev, 1)
    return counts
