"""Shared level assignment: value t > 0 sits in level k iff beta^-(k+1) < t <= beta^-k."""
from __future__ import annotations

import math

import numpy as np

# relative guard band so that exact powers of beta land on the level they top
GUARD = 1e-9


def level_of(t, beta: float):
    """Integer level index of each positive entry of ``t`` (float array of ints)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        exact = -np.log(t) / math.log(beta)
    nearest = np.round(exact)
    snap = np.abs(exact - nearest) <= GUARD * np.maximum(1.0, np.abs(nearest))
    return np.where(snap, nearest, np.floor(exact))
