"""Symmetric norms on R^d: primal and dual evaluation, subgradients, majorization.

Every norm works on arrays of shape ``(..., d)`` and reduces the last axis.
Evaluation always goes through the sorted absolute vector ``x*`` so that
symmetry (permutation and sign invariance) holds by construction.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .gfunc import GFunction, Huber, Power, g_from_dict

__all__ = [
    "DualNotConverged",
    "SymmetricNorm",
    "Lp",
    "TopK",
    "Orlicz",
    "Minimal",
    "Maximal",
    "KFunctional",
    "MaxOfScaledTopK",
    "Scaled",
    "sorted_abs",
    "sorted_abs_order",
    "top_k_norm",
    "norm_eval",
    "dual_norm_eval",
    "weakly_majorizes",
    "flat_vector",
    "normalized",
    "norm_from_dict",
    "catalog",
]


class DualNotConverged(RuntimeError):
    """The numeric dual oracle did not reach its accuracy target."""


def _as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        raise ValueError("expected a vector, got a scalar")
    if x.shape[-1] < 1:
        raise ValueError("vectors must have length >= 1")
    return x


def sorted_abs_order(x) -> np.ndarray:
    """Permutation putting ``|x|`` in non-increasing order, ties by original index."""
    x = _as_vector(x)
    return np.argsort(-np.abs(x), axis=-1, kind="stable")


def sorted_abs(x) -> np.ndarray:
    """``x*``: the entries of ``|x|`` sorted non-increasingly."""
    x = _as_vector(x)
    a = np.abs(x)
    return -np.sort(-a, axis=-1)


def top_k_norm(x, k: int):
    """Sum of the ``k`` largest absolute entries."""
    x = _as_vector(x)
    d = x.shape[-1]
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in [1, {d}], got {k}")
    return sorted_abs(x)[..., :k].sum(axis=-1)


def weakly_majorizes(x, y) -> bool:
    """True iff every prefix sum of ``x*`` dominates the matching prefix sum of ``y*``."""
    x, y = _as_vector(x), _as_vector(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    px = np.cumsum(sorted_abs(x), axis=-1)
    py = np.cumsum(sorted_abs(y), axis=-1)
    slack = 1e-12 * np.maximum(1.0, np.abs(py))
    return bool(np.all(px >= py - slack))


def flat_vector(i: int, d: int) -> np.ndarray:
    """Vector with ``i`` leading ones followed by ``d - i`` zeros."""
    if not 1 <= i <= d:
        raise ValueError(f"need 1 <= i <= d, got i={i}, d={d}")
    v = np.zeros(d)
    v[:i] = 1.0
    return v


class SymmetricNorm:
    """Base class. Subclasses supply ``_norm_sorted`` and optionally closed-form duals."""

    kind = "abstract"

    def __init__(self, dim: int):
        dim = int(dim)
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim

    # -- primal ---------------------------------------------------------
    def _check(self, x) -> np.ndarray:
        x = _as_vector(x)
        if x.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: norm has dim {self.dim}, vector has {x.shape[-1]}")
        if not np.all(np.isfinite(x)):
            raise ValueError("vector entries must be finite")
        return x

    def __call__(self, x):
        return self.norm(x)

    def norm(self, x):
        x = self._check(x)
        xs = sorted_abs(x)
        # evaluate on rows scaled to max 1 so squares of tiny entries cannot underflow
        top = xs[..., :1]
        safe = np.where(top > 0, top, 1.0)
        return top[..., 0] * self._norm_sorted(xs / safe)

    def _norm_sorted(self, xs):
        raise NotImplementedError

    # -- dual -----------------------------------------------------------
    def dual(self, y, tol: float = 1e-6):
        """``sup{<x, y> : ||x|| <= 1}`` within relative error ``tol``."""
        if not tol > 0:
            raise ValueError("tol must be positive")
        y = self._check(y)
        ys = sorted_abs(y)
        closed = self._dual_sorted(ys)
        if closed is not None:
            return closed
        flat = ys.reshape(-1, self.dim)
        out = np.array([self._dual_numeric(row, tol) for row in flat])
        return out.reshape(ys.shape[:-1]) if ys.ndim > 1 else out[0]

    def _dual_sorted(self, ys):
        """Closed-form dual on sorted input, or None when unavailable."""
        return None

    def _dual_numeric(self, ys, tol):
        return _kelley_dual(self, ys, tol)

    # -- subgradient ----------------------------------------------------
    def subgradient(self, x) -> np.ndarray:
        """A subgradient g at ``x`` with ``<g, x> = ||x||`` (so ``||g||_* = 1``)."""
        x = self._check(x)
        if x.ndim != 1:
            raise ValueError("subgradient takes a single vector")
        order = sorted_abs_order(x)
        xs = np.abs(x)[order]
        gs = self._subgradient_sorted(xs)
        g = np.empty(self.dim)
        g[order] = gs
        return g * np.where(x < 0, -1.0, 1.0)

    def _subgradient_sorted(self, xs):
        raise NotImplementedError

    # -- misc -----------------------------------------------------------
    @property
    def unit_value(self) -> float:
        """Norm of the first standard basis vector."""
        return float(self.norm(flat_vector(1, self.dim)))

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))


class Lp(SymmetricNorm):
    kind = "lp"

    def __init__(self, dim: int, p: float):
        super().__init__(dim)
        p = float(p)
        if not p >= 1:
            raise ValueError("p must be in [1, inf]")
        self.p = p

    def _norm_sorted(self, xs):
        if self.p == 1:
            return xs.sum(axis=-1)
        if math.isinf(self.p):
            return xs[..., 0]
        if self.p == 2:
            return np.sqrt(np.sum(xs * xs, axis=-1))
        top = xs[..., :1]
        safe = np.where(top > 0, top, 1.0)
        return top[..., 0] * np.sum((xs / safe) ** self.p, axis=-1) ** (1.0 / self.p)

    def _dual_sorted(self, ys):
        return Lp(self.dim, conjugate_exponent(self.p))._norm_sorted(ys)

    def _subgradient_sorted(self, xs):
        g = np.zeros_like(xs)
        if xs[0] == 0:
            return g
        if self.p == 1:
            return np.ones_like(xs)
        if math.isinf(self.p):
            g[0] = 1.0
            return g
        nrm = self._norm_sorted(xs)
        return (xs / nrm) ** (self.p - 1.0)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "p": "inf" if math.isinf(self.p) else self.p}

    def __repr__(self):
        return f"Lp(dim={self.dim}, p={self.p})"


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


class TopK(SymmetricNorm):
    kind = "topk"

    def __init__(self, dim: int, k: int):
        super().__init__(dim)
        if not 1 <= int(k) <= dim:
            raise ValueError(f"k must lie in [1, {dim}]")
        self.k = int(k)

    def _norm_sorted(self, xs):
        return xs[..., : self.k].sum(axis=-1)

    def _dual_sorted(self, ys):
        return np.maximum(ys[..., 0], ys.sum(axis=-1) / self.k)

    def _subgradient_sorted(self, xs):
        g = np.zeros_like(xs)
        g[: self.k] = 1.0
        return g

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "k": self.k}

    def __repr__(self):
        return f"TopK(dim={self.dim}, k={self.k})"


class Orlicz(SymmetricNorm):
    """Luxemburg gauge ``inf{lam > 0 : sum G(|x_i| / lam) <= 1}``."""

    kind = "orlicz"

    def __init__(self, dim: int, G: GFunction):
        super().__init__(dim)
        G.check()
        if not G.convex:
            raise ValueError("an Orlicz norm needs a convex G")
        self.G = G

    def _norm_sorted(self, xs):
        if isinstance(self.G, Power):
            return Lp(self.dim, self.G.p)._norm_sorted(xs)
        if isinstance(self.G, Huber):
            return _huber_gauge(self.G.delta, xs)
        return orlicz_gauge(self.G, xs)

    def _dual_sorted(self, ys):
        if isinstance(self.G, Power):
            return Lp(self.dim, conjugate_exponent(self.G.p))._norm_sorted(ys)
        if isinstance(self.G, Huber):
            return _huber_dual(self.G.delta, ys)
        return None

    def _dual_numeric(self, ys, tol):
        try:
            self.G.conjugate(np.array(0.0))
        except NotImplementedError:
            return _kelley_dual(self, ys, tol)
        return _amemiya_dual(self.G, ys)

    def _subgradient_sorted(self, xs):
        lam = float(self._norm_sorted(xs))
        if lam == 0:
            return np.zeros_like(xs)
        slope = self.G.derivative(xs / lam)
        denom = float(np.dot(slope, xs))
        if denom <= 0:
            raise ValueError("G has zero slope at the gauge point; no subgradient available")
        return lam * slope / denom

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "G": self.G.to_dict()}

    def __repr__(self):
        return f"Orlicz(dim={self.dim}, G={self.G!r})"


def orlicz_gauge(G: GFunction, xs, iters: int = 200):
    """Vectorized Luxemburg gauge by log-space bisection on the scale."""
    xs = np.asarray(xs, dtype=float)
    lead = xs.shape[:-1]
    flat = xs.reshape(-1, xs.shape[-1])
    top = flat.max(axis=-1)
    out = np.zeros(flat.shape[0])
    live = top > 0
    if np.any(live):
        rows = flat[live]
        m = top[live]
        d = rows.shape[-1]
        # G(m/lam) >= G(inv(1)) ... gives lam <= m/inv(1); d*G(m/lam) <= 1 gives lam >= m/inv(1/d)
        t1 = float(G.inverse(np.array(1.0)))
        td = float(G.inverse(np.array(1.0 / d)))
        lo = np.log(m / max(t1, 1e-300)) - 1.0
        hi = np.log(m / max(td, 1e-300)) + 1.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            ok = G(rows / np.exp(mid)[:, None]).sum(axis=-1) <= 1.0
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
            # stop at the resolution of the log-scale bracket itself
            if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(hi))):
                break
        out[live] = np.exp(hi)
    return out.reshape(lead) if lead else out[0]


def _huber_gauge(delta, xs):
    """Exact Huber gauge on sorted rows.

    With s = 1/lam and the top j entries in the linear part, sum G(s x_i) = 1 reads
    (A/2) s^2 + delta B s - (1 + j delta^2 / 2) = 0, A = sum_(i>j) x_i^2,
    B = sum_(i<=j) x_i. The root is kept for the j with x_(j+1) s <= delta < x_j s.
    """
    xs = np.asarray(xs, dtype=float)
    lead = xs.shape[:-1]
    X = xs.reshape(-1, xs.shape[-1])
    m, d = X.shape
    sq = X * X
    A = np.concatenate([np.cumsum(sq[:, ::-1], axis=1)[:, ::-1], np.zeros((m, 1))], axis=1)
    B = np.concatenate([np.zeros((m, 1)), np.cumsum(X, axis=1)], axis=1)
    j = np.arange(d + 1)[None, :]
    c = 1.0 + 0.5 * j * delta * delta
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.sqrt((delta * B) ** 2 + 2.0 * A * c)
        # stable root of (A/2) s^2 + delta B s - c = 0
        s = np.where(A > 0, 2.0 * c / (delta * B + disc), c / (delta * B))
        above = np.concatenate([np.full((m, 1), np.inf), X], axis=1)  # x_j, with x_0 = inf
        below = np.concatenate([X, np.zeros((m, 1))], axis=1)  # x_(j+1), with x_(d+1) = 0
        gap = np.maximum(below * s - delta, delta - above * s) / delta
    gap = np.where(np.isfinite(s) & (s > 0), gap, np.inf)
    best = np.argmin(gap, axis=1)
    sol = s[np.arange(m), best]
    out = np.where(X[:, 0] > 0, 1.0 / sol, 0.0)
    return out.reshape(lead) if lead else out[0]


def _amemiya_dual(G: GFunction, ys) -> float:
    """``inf_s (1 + sum G*(s y_i)) / s``; the objective is unimodal in s."""
    top = float(ys[0])
    if top == 0:
        return 0.0
    smax = G.max_slope / top

    def h(logs):
        sv = math.exp(logs)
        return (1.0 + float(np.sum(G.conjugate(sv * ys)))) / sv

    hi = math.log(smax) if math.isfinite(smax) else math.log(1e6 / top)
    lo = hi - 60.0
    res = minimize_scalar(h, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return float(min(res.fun, h(hi)))


def _huber_dual(delta, ys):
    # dual of the Luxemburg gauge is the Amemiya norm inf_s (1 + sum G*(s y_i)) / s,
    # with G*(u) = u^2/2 on [0, delta]; minimize 1/s + s*|y|_2^2/2 over s <= delta/|y|_inf
    ys = np.asarray(ys, dtype=float)
    l2 = np.sqrt(np.sum(ys * ys, axis=-1))
    linf = ys[..., 0]
    safe2 = np.where(l2 > 0, l2, 1.0)
    safeinf = np.where(linf > 0, linf, 1.0)
    free = math.sqrt(2.0) / safe2 <= delta / safeinf
    clipped = linf / delta + delta * l2 * l2 / (2.0 * safeinf)
    val = np.where(free, math.sqrt(2.0) * l2, clipped)
    return np.where(linf > 0, val, 0.0)


def _check_sequence(a, dim: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError("sequence must be 1-d")
    if a.size == dim:
        a = np.concatenate([[0.0], a])
    if a.size != dim + 1 or a[0] != 0.0:
        raise ValueError(f"sequence must hold a_1..a_d (or a_0=0..a_d) for d={dim}")
    if np.any(np.diff(a) < -1e-12):
        raise ValueError("sequence must be non-decreasing")
    if a[1] <= 0:
        raise ValueError("a_1 must be positive")
    n = np.arange(dim + 1)
    if dim <= 512:
        i, j = np.meshgrid(n, n, indexing="ij")
    else:
        rng = np.random.default_rng(0)
        i, j = rng.integers(0, dim + 1, size=(2, 200_000))
    ok = i + j <= dim
    lhs = a[(i + j)[ok]]
    rhs = a[i[ok]] + a[j[ok]]
    if np.any(lhs > rhs + 1e-12 * np.maximum(1.0, rhs)):
        raise ValueError("sequence must be sub-additive")
    return a


def _is_concave(b) -> bool:
    inc = np.diff(b)
    return bool(np.all(np.diff(inc) <= 1e-12 * np.maximum(1.0, np.abs(inc[1:]))))


def _prefix_bound_dual(ys, bounds):
    """``sup <ys, x>`` over sorted non-negative x with prefix sums ``S_k <= bounds[k-1]``."""
    d = ys.size
    rows, rhs = [], []
    for k, b in enumerate(bounds, start=1):
        if np.isfinite(b):
            r = np.zeros(d)
            r[:k] = 1.0
            rows.append(r)
            rhs.append(b)
    for i in range(d - 1):
        r = np.zeros(d)
        r[i], r[i + 1] = -1.0, 1.0
        rows.append(r)
        rhs.append(0.0)
    res = linprog(-ys, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=[(0, None)] * d, method="highs")
    if res.status != 0:
        raise DualNotConverged(f"prefix-bound LP failed: {res.message}")
    return float(-res.fun)


class Minimal(SymmetricNorm):
    """``max_k a_k * (average of the k largest |x_i|)``: smallest norm with ||xi_k|| = a_k."""

    kind = "minimal"

    def __init__(self, dim: int, a):
        super().__init__(dim)
        self.a = _check_sequence(a, dim)
        k = np.arange(1, dim + 1)
        self.weights = self.a[1:] / k
        self._dual_seq = np.concatenate([[0.0], k / self.a[1:]])
        self._dual_closed = _is_concave(self._dual_seq)

    @classmethod
    def sqrt(cls, dim: int) -> "Minimal":
        return cls(dim, np.sqrt(np.arange(dim + 1)))

    def _norm_sorted(self, xs):
        return np.max(np.cumsum(xs, axis=-1) * self.weights, axis=-1)

    def _dual_sorted(self, ys):
        # on the sorted cone the unit ball is {S_k <= k / a_k}; when k / a_k is concave
        # the staircase x_k = b_k - b_(k-1) meets every bound and is optimal
        if self._dual_closed:
            return ys @ np.diff(self._dual_seq)
        return None

    def _dual_numeric(self, ys, tol):
        return _prefix_bound_dual(ys, self._dual_seq[1:])

    def _subgradient_sorted(self, xs):
        vals = np.cumsum(xs) * self.weights
        k = int(np.argmax(vals)) + 1
        g = np.zeros_like(xs)
        g[:k] = self.weights[k - 1]
        return g

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "a": self.a[1:].tolist()}

    def __repr__(self):
        return f"Minimal(dim={self.dim})"


class Maximal(SymmetricNorm):
    """``sum_k (a_k - a_(k-1)) * x*_k``: largest norm with ||xi_k|| = a_k."""

    kind = "maximal"

    def __init__(self, dim: int, a):
        super().__init__(dim)
        self.a = _check_sequence(a, dim)
        self.increments = np.diff(self.a)

    @classmethod
    def sqrt(cls, dim: int) -> "Maximal":
        return cls(dim, np.sqrt(np.arange(dim + 1)))

    def _norm_sorted(self, xs):
        return xs @ self.increments

    def _dual_sorted(self, ys):
        # the unit ball on the sorted cone is conv{0, xi_j / a_j}
        return np.max(np.cumsum(ys, axis=-1) / self.a[1:], axis=-1)

    def _subgradient_sorted(self, xs):
        return self.increments.copy()

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "a": self.a[1:].tolist()}

    def __repr__(self):
        return f"Maximal(dim={self.dim})"


class KFunctional(SymmetricNorm):
    """``min{||x1||_1 + t ||x2||_2 : x1 + x2 = x}``, evaluated exactly.

    The minimizer keeps ``x2_i = sign(x_i) min(|x_i|, theta)`` for a single
    water level ``theta``; the objective is convex in ``theta`` between
    consecutive sorted magnitudes, so each segment is minimized in closed form.
    """

    kind = "kfunctional"

    def __init__(self, dim: int, t: float):
        super().__init__(dim)
        if not t > 0:
            raise ValueError("t must be positive")
        self.t = float(t)

    def _segments(self, xs):
        xs = np.asarray(xs, dtype=float)
        d = xs.shape[-1]
        t = self.t
        # m = number of coordinates strictly above the water level, m = 0..d
        head = np.concatenate([np.zeros(xs.shape[:-1] + (1,)), np.cumsum(xs, axis=-1)], axis=-1)
        sq = xs * xs
        tail = np.concatenate([np.cumsum(sq[..., ::-1], axis=-1)[..., ::-1], np.zeros(xs.shape[:-1] + (1,))], axis=-1)
        m = np.arange(d + 1, dtype=float)
        upper = np.concatenate([np.full(xs.shape[:-1] + (1,), np.inf), xs], axis=-1)
        lower = np.concatenate([xs, np.zeros(xs.shape[:-1] + (1,))], axis=-1)
        gap = t * t - m
        with np.errstate(divide="ignore", invalid="ignore"):
            stat = np.where(gap > 0, np.sqrt(tail / np.where(gap > 0, gap, 1.0)), np.inf)
        theta = np.clip(stat, lower, upper)
        # on the m = 0 segment the objective is constant, pick its lower end
        theta = np.where(np.isinf(theta), lower, theta)
        val = head - m * theta + t * np.sqrt(tail + m * theta * theta)
        return val, theta

    def _norm_sorted(self, xs):
        val, _ = self._segments(xs)
        return np.min(val, axis=-1)

    def water_level(self, x) -> float:
        """Optimal ``theta`` for a single vector (inf when the split is all l_2)."""
        xs = sorted_abs(self._check(x))
        val, theta = self._segments(xs)
        j = int(np.argmin(val))
        return float(theta[j]) if j > 0 else float("inf")

    def _dual_sorted(self, ys):
        return np.maximum(ys[..., 0], np.sqrt(np.sum(ys * ys, axis=-1)) / self.t)

    def _water_level_scaled(self, xs) -> tuple[int, float]:
        """(m, theta) for one sorted vector, with every l_2 sum taken in scaled form.

        Slower than ``_segments`` but exact when entries span many orders of magnitude.
        """
        d, t = len(xs), self.t
        head = np.concatenate([[0.0], np.cumsum(xs)])
        best = (math.inf, 0, float(xs[0]))
        for m in range(d + 1):
            upper = math.inf if m == 0 else float(xs[m - 1])
            lower = float(xs[m]) if m < d else 0.0
            gap = t * t - m
            theta = _scaled_l2(xs[m:]) / math.sqrt(gap) if gap > 0 else math.inf
            theta = min(max(theta, lower), upper)
            if math.isinf(theta):
                theta = lower
            val = head[m] - m * theta + t * _scaled_l2(np.append(xs[m:], math.sqrt(m) * theta))
            if val < best[0]:
                best = (val, m, theta)
        return best[1], best[2]

    def _subgradient_sorted(self, xs):
        if xs[0] == 0:
            return np.zeros_like(xs)
        j, th = self._water_level_scaled(xs)
        th = xs[0] if j == 0 else th
        if th <= 0:
            # everything sits in the l_1 part; the support indicator has l_2 norm sqrt(m)
            g = (xs > 0).astype(float)
            return g / max(1.0, math.sqrt(g.sum()) / self.t)
        # g = t * x2 / |x2|_2 with x2 = clip(x, theta); clipping at 1 only matters
        # when theta is off the optimum by rounding, and keeps |g|_* <= 1
        # x2 is scaled by 1 / theta first so tiny entries cannot underflow
        with np.errstate(over="ignore"):
            x2 = np.minimum(xs / th, 1.0)
        return np.minimum(1.0, self.t * x2 / math.sqrt(float(np.sum(x2 * x2))))

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "t": self.t}

    def __repr__(self):
        return f"KFunctional(dim={self.dim}, t={self.t})"


def _scaled_l2(v) -> float:
    v = np.abs(np.asarray(v, dtype=float))
    top = float(v.max()) if v.size else 0.0
    if top == 0:
        return 0.0
    return top * math.sqrt(float(np.sum((v / top) ** 2)))


class MaxOfScaledTopK(SymmetricNorm):
    """``max_k w_k * ||x||_T(k)`` for non-negative weights, at least one positive."""

    kind = "scaled_topk"

    def __init__(self, dim: int, weights):
        super().__init__(dim)
        w = np.asarray(weights, dtype=float)
        if w.shape != (dim,):
            raise ValueError(f"need {dim} weights")
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError("weights must be non-negative with at least one positive")
        self.weights = w

    def _norm_sorted(self, xs):
        return np.max(np.cumsum(xs, axis=-1) * self.weights, axis=-1)

    def _dual_numeric(self, ys, tol):
        with np.errstate(divide="ignore"):
            bounds = np.where(self.weights > 0, 1.0 / self.weights, np.inf)
        return _prefix_bound_dual(ys, bounds)

    def _subgradient_sorted(self, xs):
        vals = np.cumsum(xs) * self.weights
        k = int(np.argmax(vals)) + 1
        g = np.zeros_like(xs)
        g[:k] = self.weights[k - 1]
        return g

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "weights": self.weights.tolist()}

    def __repr__(self):
        return f"MaxOfScaledTopK(dim={self.dim})"


class Scaled(SymmetricNorm):
    """``factor * ||x||_base``."""

    kind = "scaled"

    def __init__(self, base: SymmetricNorm, factor: float):
        super().__init__(base.dim)
        if not factor > 0:
            raise ValueError("factor must be positive")
        self.base = base
        self.factor = float(factor)

    def _norm_sorted(self, xs):
        return self.factor * self.base._norm_sorted(xs)

    def _dual_sorted(self, ys):
        inner = self.base._dual_sorted(ys)
        return None if inner is None else inner / self.factor

    def _dual_numeric(self, ys, tol):
        return self.base._dual_numeric(ys, tol) / self.factor

    def _subgradient_sorted(self, xs):
        return self.factor * self.base._subgradient_sorted(xs)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "factor": self.factor, "base": self.base.to_dict()}

    def __repr__(self):
        return f"Scaled({self.base!r}, {self.factor})"


def _kelley_dual(norm: SymmetricNorm, ys, tol, max_cuts: int = 500):
    """Cutting-plane LP for ``sup{<ys, x> : x sorted non-negative, ||x|| <= 1}``.

    Each cut ``<g, x> <= 1`` uses a subgradient g (``||g||_* = 1``), so the LP
    value is a certified upper bound; the LP point rescaled onto the sphere is a
    lower bound. Stops when the relative gap drops below ``tol``.
    """
    d = ys.size
    if ys[0] == 0:
        return 0.0
    diff_rows = []
    for i in range(d - 1):
        r = np.zeros(d)
        r[i], r[i + 1] = -1.0, 1.0
        diff_rows.append(r)
    cuts = [norm._subgradient_sorted(np.ones(d))]
    box = 1.0 / norm.unit_value
    best = 0.0
    for _ in range(max_cuts):
        A = np.array(diff_rows + cuts)
        b = np.concatenate([np.zeros(d - 1), np.ones(len(cuts))])
        res = linprog(-ys, A_ub=A, b_ub=b, bounds=[(0, box)] * d, method="highs")
        if res.status != 0:
            raise DualNotConverged(f"cutting-plane LP failed: {res.message}")
        x = res.x
        upper = -res.fun
        nx = float(norm._norm_sorted(x))
        if nx > 0:
            best = max(best, float(ys @ x) / nx)
        if upper - best <= tol * best:
            return best
        cuts.append(norm._subgradient_sorted(x))
    raise DualNotConverged(f"gap {upper - best:.3g} above tol after {max_cuts} cuts")


def norm_eval(spec: SymmetricNorm, x):
    """Evaluate ``||x||`` for the given norm."""
    return spec.norm(x)


def dual_norm_eval(spec: SymmetricNorm, y, tol: float = 1e-6):
    """Evaluate the dual norm ``||y||_*`` within relative error ``tol``."""
    return spec.dual(y, tol)


def normalized(norm: SymmetricNorm) -> tuple[SymmetricNorm, float]:
    """Rescale so that the first basis vector has norm 1; returns (norm, factor)."""
    u = norm.unit_value
    if u == 1.0:
        return norm, 1.0
    return Scaled(norm, 1.0 / u), 1.0 / u


def norm_from_dict(data: dict) -> SymmetricNorm:
    kind, dim = data["kind"], int(data["dim"])
    if kind == "lp":
        p = data["p"]
        return Lp(dim, math.inf if p in ("inf", math.inf) else float(p))
    if kind == "topk":
        return TopK(dim, int(data["k"]))
    if kind == "orlicz":
        return Orlicz(dim, g_from_dict(data["G"]))
    if kind == "minimal":
        return Minimal(dim, data["a"])
    if kind == "maximal":
        return Maximal(dim, data["a"])
    if kind == "kfunctional":
        return KFunctional(dim, float(data["t"]))
    if kind == "scaled_topk":
        return MaxOfScaledTopK(dim, data["weights"])
    if kind == "scaled":
        return Scaled(norm_from_dict(data["base"]), float(data["factor"]))
    raise ValueError(f"unknown norm kind {kind!r}")


def catalog(d: int, normalize: bool = True) -> dict[str, SymmetricNorm]:
    """The reference set of symmetric norms used throughout the tests and suites."""
    norms = {
        "l1": Lp(d, 1),
        "l2": Lp(d, 2),
        "linf": Lp(d, math.inf),
        "top3": TopK(d, min(3, d)),
        "kfunc2": KFunctional(d, 2.0),
        "minimal_sqrt": Minimal.sqrt(d),
        "maximal_sqrt": Maximal.sqrt(d),
        "orlicz_huber": Orlicz(d, Huber(1.0)),
        "scaled_topk": MaxOfScaledTopK(d, np.arange(1, d + 1, dtype=float) ** -0.7),
    }
    if normalize:
        norms = {name: normalized(n)[0] for name, n in norms.items()}
    return norms
