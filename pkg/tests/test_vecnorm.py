"""Norm catalog: values against cvxpy / root-finding oracles, duals against cvxpy,
and the symmetric-norm axioms as properties."""
import math

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import brentq

from symann.gfunc import Huber, Power, Table
from symann.vecnorm import (
    KFunctional,
    Lp,
    Maximal,
    MaxOfScaledTopK,
    Minimal,
    Orlicz,
    Scaled,
    TopK,
    _huber_gauge,
    catalog,
    flat_vector,
    norm_from_dict,
    normalized,
    orlicz_gauge,
    sorted_abs,
    top_k_norm,
    weakly_majorizes,
)

D = 6
NAMES = sorted(catalog(D))


def cvx_expr(name, x, d):
    """The catalog norm written independently as a cvxpy expression (unnormalized)."""
    k = np.arange(1, d + 1)
    tops = [cp.sum_largest(cp.abs(x), j) for j in k]
    if name == "l1":
        return cp.norm1(x)
    if name == "l2":
        return cp.norm2(x)
    if name == "linf":
        return cp.norm_inf(x)
    if name == "top3":
        return tops[min(3, d) - 1]
    if name == "minimal_sqrt":
        return cp.max(cp.hstack([math.sqrt(j) / j * tops[j - 1] for j in k]))
    if name == "maximal_sqrt":
        inc = np.diff(np.sqrt(np.arange(d + 1)))
        w = inc - np.append(inc[1:], 0.0)
        return sum(w[j - 1] * tops[j - 1] for j in k)
    if name == "scaled_topk":
        w = k.astype(float) ** -0.7
        return cp.max(cp.hstack([w[j - 1] * tops[j - 1] for j in k]))
    raise KeyError(name)


def cvx_value(name, xv):
    d = len(xv)
    if name == "kfunc2":
        a = cp.Variable(d)
        prob = cp.Problem(cp.Minimize(cp.norm1(a) + 2.0 * cp.norm2(xv - a)))
        prob.solve()
        return prob.value
    if name == "orlicz_huber":
        a = np.abs(xv)
        if not a.any():
            return 0.0
        f = lambda lam: Huber(1.0)(a / lam).sum() - 1.0
        return brentq(f, 1e-6 * a.max(), 10 * a.sum(), xtol=1e-14, rtol=1e-13)
    return float(cvx_expr(name, cp.Constant(xv), d).value)


def cvx_dual(name, yv):
    d = len(yv)
    x = cp.Variable(d)
    if name == "kfunc2":
        a = cp.Variable(d)
        cons = [cp.norm1(a) + 2.0 * cp.norm2(x - a) <= 1]
    elif name == "orlicz_huber":
        cons = [cp.sum(cp.huber(x, 1.0)) / 2 <= 1]
    else:
        cons = [cvx_expr(name, x, d) <= 1]
    prob = cp.Problem(cp.Maximize(yv @ x), cons)
    prob.solve()
    return prob.value


@pytest.mark.parametrize("name", NAMES)
def test_norm_matches_independent_oracle(name, rng):
    norm = catalog(D, normalize=False)[name]
    X = rng.standard_normal((8, D)) * rng.exponential(size=(8, 1))
    X[0, 3:] = 0.0
    got = norm.norm(X)
    for x, g in zip(X, got):
        assert g == pytest.approx(cvx_value(name, x), rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("name", NAMES)
def test_dual_matches_cvxpy(name, rng):
    norm = catalog(D, normalize=False)[name]
    for _ in range(3):
        y = rng.standard_normal(D)
        assert norm.dual(y, tol=1e-7) == pytest.approx(cvx_dual(name, y), rel=2e-4)


def test_hand_values():
    x = np.array([3.0, 1.0, 1.0, 1.0])
    # cumsum (3, 4, 5, 6) weighted by sqrt(k)/k peaks at k = 1 and k = 4
    assert Minimal.sqrt(4).norm(x) == pytest.approx(3.0)
    # 3 * 1 + 1 * (2 - 1)
    assert Maximal.sqrt(4).norm(x) == pytest.approx(4.0)
    # K-functional at t = 1 on the flat vector: all l2, cost 2
    assert KFunctional(4, 1.0).norm(np.ones(4)) == pytest.approx(2.0)
    # Huber: a single coordinate needs a / lam - 1/2 = 1
    assert Orlicz(1, Huber(1.0)).norm([1.0]) == pytest.approx(2.0 / 3.0)
    assert Orlicz(2, Huber(1.0)).norm([1.0, 1.0]) == pytest.approx(1.0)
    assert TopK(5, 2).norm([1, -5, 2, 0, 4]) == 9
    assert top_k_norm([1, -5, 2, 0, 4], 3) == 11


def test_huber_gauge_matches_bisection(rng):
    for delta in (0.1, 1.0, 5.0):
        X = rng.standard_cauchy((300, 11)) * rng.choice([1e-3, 1.0, 1e3], size=(300, 1))
        X[::5, 4:] = 0.0
        xs = sorted_abs(X)
        np.testing.assert_allclose(_huber_gauge(delta, xs), orlicz_gauge(Huber(delta), xs), rtol=1e-12)
    assert _huber_gauge(1.0, np.zeros(4)) == 0.0


def test_power_orlicz_is_lp(rng):
    X = rng.standard_normal((20, 7))
    np.testing.assert_allclose(Orlicz(7, Power(3.0)).norm(X), Lp(7, 3).norm(X), rtol=1e-12)
    np.testing.assert_allclose(orlicz_gauge(Power(3.0), sorted_abs(X)), Lp(7, 3).norm(X), rtol=1e-12)


def test_table_orlicz_uses_kelley_dual(rng):
    G = Table([0.5, 1.0, 2.0], [0.1, 0.5, 2.0])
    norm = Orlicz(5, G)
    y = rng.standard_normal(5)
    val = norm.dual(y, tol=1e-5)
    # sup over the boundary sampled densely never exceeds the dual
    X = rng.standard_normal((20000, 5))
    X /= norm.norm(X)[:, None]
    assert np.max(X @ y) <= val * (1 + 1e-5)
    assert np.max(X @ y) >= 0.9 * val


def test_flat_vector_and_unit_value():
    np.testing.assert_array_equal(flat_vector(2, 4), [1, 1, 0, 0])
    assert Lp(9, 2).unit_value == 1.0
    for norm in catalog(9).values():
        assert norm.unit_value == pytest.approx(1.0)


def test_validation():
    with pytest.raises(ValueError):
        Lp(3, 0.5)
    with pytest.raises(ValueError):
        TopK(3, 4)
    with pytest.raises(ValueError):
        Minimal(3, [1.0, 3.0, 3.5])  # not sub-additive
    with pytest.raises(ValueError):
        Minimal(3, [1.0, 0.5, 2.0])  # decreasing
    with pytest.raises(ValueError):
        Lp(3, 2).norm([1.0, 2.0])
    with pytest.raises(ValueError):
        Lp(2, 2).norm([np.nan, 1.0])
    with pytest.raises(ValueError):
        Orlicz(3, Table([1.0, 2.0], [1.0, 1.5]))  # concave table
    with pytest.raises(ValueError):
        MaxOfScaledTopK(3, [0.0, 0.0, 0.0])


@pytest.mark.parametrize("name", NAMES)
def test_to_dict_roundtrip(name, rng):
    norm = catalog(D)[name]
    back = norm_from_dict(norm.to_dict())
    assert back == norm
    x = rng.standard_normal(D)
    assert back.norm(x) == pytest.approx(norm.norm(x), rel=1e-12)


def test_normalized_scale():
    base = Lp(4, 1)
    s, f = normalized(Scaled(base, 3.0))
    assert f == pytest.approx(1 / 3)
    assert s.unit_value == pytest.approx(1.0)


def test_weak_majorization():
    assert weakly_majorizes([3, 0, 0], [1, 1, 1])
    assert not weakly_majorizes([1, 1, 1], [3, 0, 0])
    assert weakly_majorizes([-2, 1], [1, 1])


# -- properties ------------------------------------------------------------------

vec = arrays(np.float64, D, elements=st.floats(-100, 100, allow_nan=False))
CAT = catalog(D)


@given(st.sampled_from(NAMES), vec, st.permutations(range(D)), arrays(np.bool_, D))
def test_symmetry(name, x, perm, flips):
    norm = CAT[name]
    y = np.where(flips, -x, x)[list(perm)]
    assert norm.norm(y) == pytest.approx(norm.norm(x), rel=1e-9, abs=1e-12)


@given(st.sampled_from(NAMES), vec, vec)
def test_triangle(name, x, y):
    norm = CAT[name]
    assert norm.norm(x + y) <= (norm.norm(x) + norm.norm(y)) * (1 + 1e-9) + 1e-9


@given(st.sampled_from(NAMES), vec, st.floats(-50, 50))
def test_homogeneity(name, x, c):
    norm = CAT[name]
    assert norm.norm(c * x) == pytest.approx(abs(c) * norm.norm(x), rel=1e-9, abs=1e-9)


@given(st.sampled_from(NAMES), vec, st.floats(0, 1))
def test_monotone_under_majorization(name, x, shrink):
    norm = CAT[name]
    # averaging two coordinates is weakly majorized by the original
    y = x.copy()
    y[0] = y[1] = shrink * (x[0] + x[1]) / 2
    assert weakly_majorizes(x, y)
    assert norm.norm(y) <= norm.norm(x) * (1 + 1e-9) + 1e-12


@given(st.sampled_from([n for n in NAMES if n not in ("scaled_topk",)]), vec, vec)
def test_dual_pairing(name, x, y):
    norm = CAT[name]
    assert float(x @ y) <= norm.norm(x) * norm.dual(y, tol=1e-4) * (1 + 1e-3) + 1e-9


@given(st.sampled_from(NAMES), vec.filter(lambda v: np.abs(v).max() > 1e-3))
def test_subgradient(name, x):
    norm = CAT[name]
    g = norm.subgradient(x)
    assert float(g @ x) == pytest.approx(norm.norm(x), rel=1e-6, abs=1e-9)
    assert norm.dual(g, tol=1e-4) <= 1 + 1e-3
