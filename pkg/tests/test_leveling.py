import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from symann.leveling import (
    LevelParams,
    LevelProfile,
    LevelRangeError,
    counts_to_vector,
    cut_small,
    level_vector,
    levels,
    rounded,
    rounded_counts,
    simplify,
    simplify_counts,
    vector_to_counts,
)
from symann.vecnorm import catalog, weakly_majorizes


def slow_level(t, beta):
    """Level k with beta^-(k+1) < t <= beta^-k, found by walking k."""
    k = 0
    while t > beta**-k:
        k -= 1
    while t <= beta ** -(k + 1):
        k += 1
    return k


def slow_rounded(x, beta, d, tau):
    """The rounding procedure written out with plain loops."""
    kept = [abs(v) for v in x if abs(v) >= tau and v != 0]
    K = 2 * math.log(d) / math.log(beta)
    counts = {}
    for v in kept:
        k = slow_level(v, beta)
        counts[k] = counts.get(k, 0) + 1
    out, cap = [], d
    k = 0
    while k < max(K, 1):
        b = counts.get(k, 0)
        if b > 0:
            j = 0
            while beta**j < b:
                j += 1
            n = math.floor(beta**j + 1e-9)
            if cap >= n:
                out += [beta**-k] * n
                cap -= n
        k += 1
    return np.array(out + [0.0] * (d - len(out)))


def test_params():
    p = LevelParams(1.5, 12)
    assert p.tau == pytest.approx(1.5 / 144)
    assert p.level_bound == pytest.approx(2 * math.log(12) / math.log(1.5))
    assert p.n_levels == 13
    assert p.window_offset == pytest.approx(5.1285, abs=1e-4)
    np.testing.assert_array_equal(p.count_values(), [0, 1, 2, 3, 5, 7, 11])
    # floor(beta^j) for beta^(j-1) < b <= beta^j
    np.testing.assert_array_equal(p.rounded_count([0, 1, 2, 3, 4, 6, 8]), [0, 1, 2, 3, 5, 7, 11])
    assert LevelParams.with_linear_tau(1.5, 10).tau == pytest.approx(0.15)
    assert LevelParams(1.5, 1).n_levels == 1
    for bad in [dict(beta=2.0, d=4), dict(beta=1.0, d=4), dict(beta=1.5, d=0), dict(beta=1.5, d=4, tau=1.5)]:
        with pytest.raises(ValueError):
            LevelParams(**bad)


def test_levels_examples():
    p = LevelParams(1.5, 4)
    assert levels([1.0, 0.8, 0.5], p).counts == {0: 2, 1: 1}
    assert levels([0.0, 0.0], p).counts == {}
    assert levels([1.5], p).counts == {-1: 1}
    # exact powers of beta sit on the level they top
    assert levels([1.5**-3, -(1.5**-7)], p).counts == {3: 1, 7: 1}
    prof = LevelProfile({0: 2, 3: 1})
    assert LevelProfile.from_text(prof.to_text()) == prof
    assert prof.total == 3 and prof[5] == 0
    with pytest.raises(LevelRangeError):
        levels([1e-320], LevelParams(1.01, 4))


def test_cut_and_level_vector_examples():
    p = LevelParams(1.5, 4, tau=0.1)
    np.testing.assert_array_equal(cut_small([1.0, 0.05], p), [1.0, 0.0])
    np.testing.assert_allclose(level_vector([1.0, 0.8, 0.5], LevelParams(1.5, 3)), [1.0, 1.0, 2 / 3])
    x = np.array([1.5**-2, 1.5**-2, 1.0])
    np.testing.assert_allclose(level_vector(x, LevelParams(1.5, 3)), np.sort(x)[::-1])


def test_rounded_counts_examples():
    p = LevelParams(1.5, 4)
    np.testing.assert_allclose(rounded_counts([1.0, 1.0, 1.0, 0.0], p), [1, 1, 1, 0])
    # four entries round up to five and no longer fit, so the level is skipped
    np.testing.assert_allclose(rounded_counts([1.0, 1.0, 1.0, 1.0], p), [0, 0, 0, 0])
    np.testing.assert_allclose(rounded(np.eye(4)[0], p), [1, 0, 0, 0])
    np.testing.assert_allclose(rounded(np.zeros(4), p), np.zeros(4))
    with pytest.raises(ValueError):
        rounded_counts([0.5, 1.0, 0.0, 0.0], p)
    with pytest.raises(ValueError):
        rounded_counts([0.9, 0.0, 0.0, 0.0], p)


def test_simplify_examples():
    p = LevelParams(1.5, 8)
    c = np.zeros(p.n_levels, dtype=int)
    c[0], c[6] = 4, 3
    z = counts_to_vector(c, p)
    np.testing.assert_allclose(simplify(z, p), [1, 1, 1, 1, 0, 0, 0, 0])
    single = np.zeros(p.n_levels, dtype=int)
    single[4] = 5
    np.testing.assert_array_equal(simplify_counts(single, p), single)
    # the window of level 5 only reaches levels below -0.13, so nothing is dropped
    c2 = np.zeros(p.n_levels, dtype=int)
    c2[0], c2[5] = 3, 2
    np.testing.assert_array_equal(simplify_counts(c2, p), c2)
    np.testing.assert_array_equal(vector_to_counts(z, p), c)


def test_rounded_matches_slow_procedure(rng):
    for beta in (1.2, 1.5):
        for d in (3, 8, 12):
            p = LevelParams(beta, d)
            for _ in range(200):
                x = rng.standard_normal(d) * rng.choice([0.05, 0.3, 1.0])
                x = x / max(1.0, np.abs(x).max())
                np.testing.assert_allclose(rounded(x, p), slow_rounded(x, beta, d, p.tau), rtol=1e-12)


# -- properties ------------------------------------------------------------------

D = 12
CAT = catalog(D)
# magnitudes below 1e-30 would need levels beyond the representable range at beta = 1.2
entry = st.one_of(st.just(0.0), st.floats(1e-30, 1.0), st.floats(-1.0, -1e-30))
unit_vec = arrays(np.float64, D, elements=entry).filter(lambda v: np.abs(v).max() > 0)


def drops_a_level(x, p):
    """True when some kept level's rounded count no longer fits the remaining capacity."""
    lev = levels(cut_small(x, p), p).counts
    cap = p.d
    for k in range(p.n_levels):
        n = int(p.rounded_count(lev.get(k, 0)))
        if n > 0:
            if n > cap:
                return True
            cap -= n
    return False


@given(st.sampled_from(sorted(CAT)), st.sampled_from([1.2, 1.5]), unit_vec)
def test_sandwich_chain(name, beta, x):
    norm = CAT[name]
    p = LevelParams(beta, D)
    x = x / norm.norm(x)
    c = cut_small(x, p)
    assert weakly_majorizes(x, c)
    assert 1 - p.tau * D - 1e-12 <= norm.norm(c) <= 1 + 1e-12
    v = level_vector(x, p)
    assert norm.norm(v) / beta <= 1 + 1e-12 <= norm.norm(v) * (1 + 2e-12)
    r = norm.norm(rounded(x, p))
    assert r <= beta**2 * (1 + 1e-12)
    if not drops_a_level(x, p):
        assert 1 - p.tau * D - 1e-12 <= r


@pytest.mark.xfail(strict=True, reason="a level whose rounded count exceeds the remaining capacity is "
                   "dropped, so the lower bound fails (decisions ledger)")
def test_rounded_lower_bound_unconditional():
    p = LevelParams(1.5, D)
    norm = CAT["l1"]
    x = np.full(D, 1.0 / D)
    # twelve entries round up to seventeen, which exceeds d = 12
    assert drops_a_level(x, p)
    assert norm.norm(rounded(x, p)) >= 1 - p.tau * D


@given(st.sampled_from([1.2, 1.5]), unit_vec)
def test_rounded_shape(beta, x):
    p = LevelParams(beta, D)
    z = rounded(x, p)
    assert np.all(np.diff(z) <= 0) and np.all(z >= 0)
    vals = np.unique(z[z > 0])
    assert len(vals) <= p.level_bound
    ks = np.round(-np.log(vals) / math.log(beta))
    np.testing.assert_allclose(vals, beta**-ks, rtol=1e-12)
    assert np.all((ks >= 0) & (ks < p.level_bound))
    np.testing.assert_array_equal(rounded(z, p), z)


@given(st.lists(st.sampled_from([0, 1, 2, 3, 5]), min_size=13, max_size=13))
def test_simplify_idempotent_and_shrinking(counts):
    p = LevelParams(1.5, 40)
    c = np.array(counts)[: p.n_levels]
    assume(c.sum() <= p.d)
    s = simplify_counts(c, p)
    np.testing.assert_array_equal(simplify_counts(s, p), s)
    assert np.all((s == c) | (s == 0))
    assert weakly_majorizes(counts_to_vector(c, p), counts_to_vector(s, p))
