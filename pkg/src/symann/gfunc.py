"""Non-decreasing functions G: R+ -> R+ with G(0) = 0.

These drive both Orlicz gauges (unit ball ``{x : sum G(|x_i|) <= 1}``) and the
randomized coordinate scalings in :mod:`symann.randmap`, which need the
generalized inverse ``inf{t >= 0 : G(t) >= g}``.
"""
from __future__ import annotations

import numpy as np

from ._levels import level_of

__all__ = [
    "GFunction",
    "Power",
    "StepLinear",
    "Huber",
    "Table",
    "LevelTableG",
    "ScaledG",
    "g_from_dict",
]


class GFunction:
    """Base class. Subclasses implement ``__call__`` (vectorized)."""

    convex = False

    def __call__(self, t):
        raise NotImplementedError

    def derivative(self, t):
        """Right derivative, by forward difference unless overridden."""
        t = np.asarray(t, dtype=float)
        h = 1e-7 * np.maximum(1.0, t)
        return (self(t + h) - self(t)) / h

    def inverse(self, g):
        """Generalized inverse ``inf{t >= 0 : G(t) >= g}`` by monotone bisection.

        Absolute tolerance 1e-12 on ``t``; ``g <= 0`` maps to 0.
        """
        g = np.asarray(g, dtype=float)
        flat = g.ravel()
        out = np.zeros_like(flat)
        pos = flat > 0
        if np.any(pos):
            target = flat[pos]
            lo = np.zeros_like(target)
            hi = np.ones_like(target)
            for _ in range(2000):
                short = self(hi) < target
                if not short.any():
                    break
                hi[short] *= 2.0
            else:
                raise ValueError("G does not reach the requested value; G(t) must grow without bound")
            # hi - lo halves each step; stop once below 1e-12 everywhere
            while np.max(hi - lo) > 1e-12:
                mid = 0.5 * (lo + hi)
                up = self(mid) >= target
                hi = np.where(up, mid, hi)
                lo = np.where(up, lo, mid)
                if np.all(hi - lo <= 1e-12 * np.maximum(1.0, hi)):
                    break
            out[pos] = hi
        return out.reshape(g.shape)

    def conjugate(self, u):
        """Convex conjugate ``sup_t (u t - G(t))``; only defined for convex G with a closed form."""
        raise NotImplementedError(f"{type(self).__name__} has no closed-form conjugate")

    @property
    def max_slope(self) -> float:
        """Supremum of G's slope; the conjugate is +inf beyond it."""
        return np.inf

    def check(self, grid=None):
        """Validate G(0) = 0, monotonicity and growth on a sampled grid."""
        if grid is None:
            grid = np.concatenate([[0.0], np.logspace(-8, 8, 801)])
        vals = np.asarray(self(grid), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("G must be finite on [0, inf)")
        if vals[0] != 0.0:
            raise ValueError(f"G(0) must be 0, got {vals[0]}")
        if np.any(np.diff(vals) < -1e-12 * np.maximum(1.0, np.abs(vals[1:]))):
            raise ValueError("G must be non-decreasing")
        if vals[-1] <= vals[len(vals) // 2] or vals[-1] < 1e3:
            raise ValueError("G(t) must grow without bound")
        return self

    def to_dict(self) -> dict:
        raise NotImplementedError


class Power(GFunction):
    """G(t) = t**p, p >= 1. The Orlicz gauge is the l_p norm."""

    convex = True

    def __init__(self, p: float):
        if not p >= 1:
            raise ValueError("Power requires p >= 1")
        self.p = float(p)

    def __call__(self, t):
        return np.power(np.asarray(t, dtype=float), self.p)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.p == 1.0:
            return np.ones_like(t)
        return self.p * np.power(t, self.p - 1.0)

    def inverse(self, g):
        g = np.maximum(np.asarray(g, dtype=float), 0.0)
        return np.power(g, 1.0 / self.p)

    def to_dict(self):
        return {"kind": "power", "p": self.p}

    def __repr__(self):
        return f"Power(p={self.p})"


class StepLinear(GFunction):
    """G(t) = t for t >= threshold, else 0 (right-continuous jump at the threshold)."""

    def __init__(self, threshold: float):
        if threshold < 0:
            raise ValueError("threshold must be non-negative")
        self.threshold = float(threshold)
        self.convex = self.threshold == 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= self.threshold, t, 0.0)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= self.threshold, 1.0, 0.0)

    def inverse(self, g):
        # every g in (0, threshold] lands on the atom at the threshold
        g = np.asarray(g, dtype=float)
        return np.where(g > 0, np.maximum(g, self.threshold), 0.0)

    def to_dict(self):
        return {"kind": "step_linear", "threshold": self.threshold}

    def __repr__(self):
        return f"StepLinear(threshold={self.threshold})"


class Huber(GFunction):
    """Huber loss: t**2/2 for t <= delta, delta*(t - delta/2) beyond."""

    convex = True

    def __init__(self, delta: float = 1.0):
        if not delta > 0:
            raise ValueError("delta must be positive")
        self.delta = float(delta)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        dl = self.delta
        return np.where(t <= dl, 0.5 * t * t, dl * (t - 0.5 * dl))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.minimum(t, self.delta)

    def inverse(self, g):
        g = np.maximum(np.asarray(g, dtype=float), 0.0)
        dl = self.delta
        return np.where(g <= 0.5 * dl * dl, np.sqrt(2.0 * g), g / dl + 0.5 * dl)

    def conjugate(self, u):
        """u**2/2 on [0, delta], +inf beyond."""
        u = np.asarray(u, dtype=float)
        return np.where(u <= self.delta, 0.5 * u * u, np.inf)

    @property
    def max_slope(self):
        return self.delta

    def to_dict(self):
        return {"kind": "huber", "delta": self.delta}

    def __repr__(self):
        return f"Huber(delta={self.delta})"


class Table(GFunction):
    """Monotone breakpoint table ``(t_i, g_i)`` with (0, 0) prepended.

    ``rule="linear"`` interpolates linearly and continues the last segment's
    slope past the final breakpoint. ``rule="step"`` holds ``g_i`` on
    ``[t_i, t_{i+1})`` and grows as ``g_last * t / t_last`` past the end.
    Either way G is unbounded.
    """

    def __init__(self, ts, gs, rule: str = "linear"):
        ts = np.asarray(ts, dtype=float)
        gs = np.asarray(gs, dtype=float)
        if ts.ndim != 1 or ts.shape != gs.shape or ts.size == 0:
            raise ValueError("breakpoints must be two equal-length 1-d sequences")
        if np.any(ts <= 0) or np.any(np.diff(ts) <= 0):
            raise ValueError("breakpoint abscissae must be positive and increasing")
        if np.any(gs < 0) or np.any(np.diff(gs) < 0) or gs[-1] <= 0:
            raise ValueError("breakpoint values must be non-negative, non-decreasing, last > 0")
        if rule not in ("linear", "step"):
            raise ValueError("rule must be 'linear' or 'step'")
        self.ts, self.gs, self.rule = ts, gs, rule
        if rule == "linear":
            knots_t = np.concatenate([[0.0], ts])
            knots_g = np.concatenate([[0.0], gs])
            slopes = np.diff(knots_g) / np.diff(knots_t)
            if slopes[-1] <= 0:
                raise ValueError("the last linear segment must have positive slope")
            self.tail_slope = float(slopes[-1])
            self.convex = bool(np.all(np.diff(slopes) >= -1e-12))
        else:
            self.tail_slope = float(gs[-1] / ts[-1])
            self.convex = False

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tl, gl = self.ts[-1], self.gs[-1]
        if self.rule == "linear":
            inside = np.interp(t, np.concatenate([[0.0], self.ts]), np.concatenate([[0.0], self.gs]))
            beyond = gl + self.tail_slope * (t - tl)
        else:
            idx = np.searchsorted(self.ts, t, side="right") - 1
            inside = np.where(idx >= 0, self.gs[np.clip(idx, 0, None)], 0.0)
            beyond = gl * t / tl
        return np.where(t > tl, beyond, inside)

    def conjugate(self, u):
        # piecewise linear convex G: the sup is attained at a knot
        if not (self.rule == "linear" and self.convex):
            raise NotImplementedError("conjugate needs a convex linear table")
        u = np.asarray(u, dtype=float)
        knots_t = np.concatenate([[0.0], self.ts])
        knots_g = np.concatenate([[0.0], self.gs])
        vals = np.max(u[..., None] * knots_t - knots_g, axis=-1)
        return np.where(u <= self.max_slope * (1 + 1e-12), vals, np.inf)

    @property
    def max_slope(self):
        return self.tail_slope if self.rule == "linear" else np.inf

    def to_dict(self):
        return {"kind": "table", "ts": self.ts.tolist(), "gs": self.gs.tolist(), "rule": self.rule}

    def __repr__(self):
        return f"Table({len(self.ts)} breakpoints, rule={self.rule!r})"


class LevelTableG(GFunction):
    """Level-count function for a general symmetric norm.

    ``G(t) = sum_i [t in (beta^-(i+1), beta^-i]] / L_i + overflow * t * [t > 1]``
    over integer levels ``0 <= i < n_levels``; ``L_i = inf`` drops the term.
    """

    def __init__(self, beta: float, L, overflow: float):
        L = np.asarray(L, dtype=float)
        if np.any(L < 1):
            raise ValueError("every L_k must be >= 1 (or inf)")
        self.beta = float(beta)
        self.L = L
        self.overflow = float(overflow)
        self.weights = np.where(np.isfinite(L), 1.0 / L, 0.0)
        if np.any(np.diff(self.weights) > 0):
            raise ValueError("L_k must be non-decreasing in k")

    @property
    def n_levels(self) -> int:
        return len(self.L)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = (t > 0) & (t <= 1.0)
        if np.any(pos):
            lev = level_of(t[pos], self.beta)
            ok = (lev >= 0) & (lev < self.n_levels)
            vals = np.zeros_like(lev)
            vals[ok] = self.weights[lev[ok].astype(int)]
            out[pos] = vals
        big = t > 1.0
        out[big] = self.overflow * t[big]
        return out

    def inverse(self, g):
        g = np.asarray(g, dtype=float)
        # weights are non-increasing in the level index, so the levels reaching g
        # form a prefix 0..i; the infimum of level i's interval (beta^-(i+1), beta^-i]
        # is its open bottom end
        reach = np.searchsorted(-self.weights, -g, side="right")
        deepest = np.clip(reach - 1, 0, None)
        on_levels = np.power(self.beta, -(deepest + 1.0))
        beyond = np.maximum(1.0, g / self.overflow) if self.overflow > 0 else np.full_like(g, np.inf)
        out = np.where(reach > 0, on_levels, beyond)
        return np.where(g > 0, out, 0.0)

    def to_dict(self):
        return {
            "kind": "level_table",
            "beta": self.beta,
            "L": [None if not np.isfinite(v) else float(v) for v in self.L],
            "overflow": self.overflow,
        }

    def __repr__(self):
        return f"LevelTableG(beta={self.beta}, levels={self.n_levels})"


class ScaledG(GFunction):
    """``c * G(t)`` for a positive constant c."""

    def __init__(self, base: GFunction, factor: float):
        if not factor > 0:
            raise ValueError("factor must be positive")
        self.base = base
        self.factor = float(factor)
        self.convex = base.convex

    def __call__(self, t):
        return self.factor * self.base(t)

    def derivative(self, t):
        return self.factor * self.base.derivative(t)

    def inverse(self, g):
        return self.base.inverse(np.asarray(g, dtype=float) / self.factor)

    def conjugate(self, u):
        return self.factor * self.base.conjugate(np.asarray(u, dtype=float) / self.factor)

    @property
    def max_slope(self):
        return self.factor * self.base.max_slope

    def to_dict(self):
        return {"kind": "scaled", "factor": self.factor, "base": self.base.to_dict()}

    def __repr__(self):
        return f"ScaledG({self.base!r}, {self.factor})"


def g_from_dict(data: dict) -> GFunction:
    kind = data["kind"]
    if kind == "power":
        return Power(data["p"])
    if kind == "step_linear":
        return StepLinear(data["threshold"])
    if kind == "huber":
        return Huber(data["delta"])
    if kind == "table":
        return Table(data["ts"], data["gs"], data.get("rule", "linear"))
    if kind == "level_table":
        L = [np.inf if v is None else v for v in data["L"]]
        return LevelTableG(data["beta"], L, data["overflow"])
    if kind == "scaled":
        return ScaledG(g_from_dict(data["base"]), data["factor"])
    raise ValueError(f"unknown G kind {kind!r}")
