"""Invariant suites. Each returns a machine-readable dict; no timings, so outputs are reproducible.

Suite functions take their reference parameters as defaults; the acceptance tests
call the same functions with the criterion parameters.
"""
from __future__ import annotations

import math

import numpy as np

from ..annindex import DistanceOracle, Ring, build_ring_tree, node_ids
from ..annindex.ringtree import TOL, default_depth_cap
from ..gfunc import Power
from ..leveling import LevelParams, simplify_counts
from ..netgen import coeffs_from_net_vector, enumerate_rounded_dual_set, materialize_counts
from ..randmap import make_rng, scalings_from_uniform, symmetric_G, topk_G
from ..vecnorm import KFunctional, Lp, Minimal, TopK, catalog, normalized, top_k_norm

SANDWICH_NORMS = ("l1", "l2", "linf", "top3", "kfunc2", "minimal_sqrt")


def _check(name, passed, **detail):
    return {"name": name, "passed": bool(passed), **detail}


def _result(suite, checks):
    return {"suite": suite, "passed": all(c["passed"] for c in checks), "checks": checks}


def sample_vectors(d: int, m: int, rng) -> np.ndarray:
    """A mix of shapes: dense Gaussian, sparse, heavy-tailed, flat and geometric profiles."""
    kinds = rng.integers(0, 5, size=m)
    X = rng.standard_normal((m, d))
    sparse = kinds == 1
    keep = rng.random((m, d)) < rng.uniform(0.02, 0.5, size=(m, 1))
    keep[np.arange(m), rng.integers(0, d, size=m)] = True
    X[sparse] *= keep[sparse]
    heavy = kinds == 2
    X[heavy] = rng.standard_cauchy((int(heavy.sum()), d))
    flat = kinds == 3
    k = rng.integers(1, d + 1, size=m)
    X[flat] = (np.arange(d)[None, :] < k[flat, None]) * rng.choice([-1.0, 1.0], size=(int(flat.sum()), d))
    geo = kinds == 4
    ratio = rng.uniform(0.3, 1.0, size=(int(geo.sum()), 1))
    X[geo] = ratio ** np.arange(d)[None, :] * rng.choice([-1.0, 1.0], size=(int(geo.sum()), d))
    return X


# -- lemma-4.7-identity ----------------------------------------------------------

def lemma47_identity(samples: int = 10_000, max_d: int = 64, seed: int = 0, rtol: float = 1e-9) -> dict:
    """sum_k c_k ||x||_T(k) = <x*, y> for non-increasing y >= 0 with c_k = y_k - y_(k+1)."""
    rng = make_rng(seed, 47)
    worst = 0.0
    for _ in range(samples):
        d = int(rng.integers(1, max_d + 1))
        y = np.sort(rng.exponential(size=d) * (rng.random(d) < 0.7))[::-1]
        x = rng.standard_normal(d) * rng.exponential(size=d)
        c = coeffs_from_net_vector(y)
        lhs = sum(c[k - 1] * top_k_norm(x, k) for k in range(1, d + 1))
        rhs = float(np.sort(np.abs(x))[::-1] @ y)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return _result("lemma-4.7-identity", [_check("identity", worst <= rtol, samples=samples, max_rel_err=worst)])


# -- sandwich ------------------------------------------------------------------

def rhat_for(name: str, d: int, beta: float = 1.5, dual_tol: float = 0.02):
    unit = catalog(d)[name]
    p = LevelParams(beta, d)
    return unit, p, enumerate_rounded_dual_set(unit, p, dual_tol)


def sandwich_check(name, unit, p, rhat, dual_tol, n_x, rng, chunk: int = 200_000) -> dict:
    """||x|| - tau d <= max_{z in R-hat} <x*, z> <= beta^2 (1 + dual_tol) ||x|| on unit vectors."""
    X = sample_vectors(p.d, n_x, rng)
    X /= unit.norm(X)[:, None]
    xs = np.sort(np.abs(X), axis=1)[:, ::-1]
    best = np.zeros(n_x)
    for Z in rhat.chunks(chunk):
        best = np.maximum(best, np.max(xs @ Z.T, axis=1))
    lower = 1.0 - p.tau * p.d
    upper = p.beta**2 * (1.0 + dual_tol)
    bad = int(np.sum((best < lower - 1e-12) | (best > upper + 1e-12)))
    return _check(f"sandwich[{name}]", bad == 0, rhat=len(rhat), vectors=n_x, violations=bad,
                  min_ratio=float(best.min()), max_ratio=float(best.max()), lower=lower, upper=upper)


def pruning_check(name, unit, p, rhat, chunk: int = 200_000) -> dict:
    """||S(z) - z|| <= 2 (beta - 1) ||z|| for every z in R-hat."""
    worst, bad = 0.0, 0
    for s in range(0, len(rhat), chunk):
        C = rhat.counts[s : s + chunk].astype(np.int64)
        Z = materialize_counts(C, p)
        SZ = materialize_counts(simplify_counts(C, p), p)
        nz = unit.norm(Z)
        diff = unit.norm(SZ - Z)
        bound = 2.0 * (p.beta - 1.0) * nz
        bad += int(np.sum(diff > bound * (1 + 1e-12) + 1e-15))
        live = nz > 0
        if live.any():
            worst = max(worst, float(np.max(diff[live] / nz[live])))
    return _check(f"pruning[{name}]", bad == 0, rhat=len(rhat), violations=bad, max_ratio=worst,
                  bound=2.0 * (p.beta - 1.0))


def sandwich(d: int = 8, beta: float = 1.5, dual_tol: float = 0.02, n_x: int = 500, seed: int = 0,
             norms=SANDWICH_NORMS) -> dict:
    checks = []
    for i, name in enumerate(norms):
        unit, p, rhat = rhat_for(name, d, beta, dual_tol)
        checks.append(sandwich_check(name, unit, p, rhat, dual_tol, n_x, make_rng(seed, 48, i)))
        checks.append(pruning_check(name, unit, p, rhat))
    return _result("sandwich", checks)


# -- monte-carlo-3.1 -----------------------------------------------------------

def _mc_probabilities(G, x, mu, D, trials, rng):
    u = scalings_from_uniform(G, mu, rng.random((trials, len(x))))
    img = np.max(np.abs(x)[None, :] / u, axis=1)
    return float(np.mean(img <= 1.0)), float(np.mean(img > D))


def monte_carlo_map(G, unit_norm, label, mu, alpha, D, tail_bound, trials, n_x, d, seed):
    """For unit-norm x: Pr[||f(x)||_inf <= 1] >= mu - 3 sigma; for ||x|| = 1.05 alpha D:
    Pr[||f(x)||_inf > D] >= tail_bound - 3 sigma."""
    rng = make_rng(seed, 31)
    X = sample_vectors(d, n_x, rng)
    X /= unit_norm(X)[:, None]
    s_near = 3.0 * math.sqrt(mu * (1 - mu) / trials)
    s_far = 3.0 * math.sqrt(max(tail_bound * (1 - tail_bound), 1e-12) / trials)
    near_min, far_min = 1.0, 1.0
    for i, x in enumerate(X):
        p_near, _ = _mc_probabilities(G, x, mu, D, trials, make_rng(seed, 31, i, 0))
        _, p_far = _mc_probabilities(G, 1.05 * alpha * D * x, mu, D, trials, make_rng(seed, 31, i, 1))
        near_min, far_min = min(near_min, p_near), min(far_min, p_far)
    return [
        _check(f"{label}.near", near_min >= mu - s_near, min_prob=near_min, bound=mu, slack=s_near, vectors=n_x,
               trials=trials),
        _check(f"{label}.far", far_min >= tail_bound - s_far, min_prob=far_min, bound=tail_bound, slack=s_far,
               vectors=n_x, trials=trials),
    ]


def monte_carlo_31(trials: int = 20_000, n_x: int = 5, d: int = 16, mu: float = 0.3, alpha: float = 3.0,
                   D: float = 4.0, k: int = 4, seed: int = 0) -> dict:
    checks = monte_carlo_map(Power(2.0), Lp(d, 2).norm, "power2", mu, alpha, D, 1 - mu**alpha, trials, n_x, d, seed)
    checks += monte_carlo_map(topk_G(k, d), TopK(d, k).norm, f"top{k}", mu, alpha, D, 1 - mu ** (alpha - 1),
                              trials, n_x, d, seed + 1)
    return _result("monte-carlo-3.1", checks)


# -- appendix-b ----------------------------------------------------------------

def appendix_b(d: int = 256, beta: float = 1.5, alpha: float = 2.0, D: float = 2.0, n_x: int = 100_000,
               seed: int = 0, chunk: int = 10_000, norms=None, variants=(False, True)) -> dict:
    """Both implications of the level-count lemma on every catalog norm:
    ||x|| <= 1 => sum G(|x_i|) <= K and ||x|| > 3.5 alpha D K => sum G(|x_i| / D) >= alpha K,
    with K = 2 log_beta d, on the normalized norm.

    ``variants`` lists the constructions to check: False is the level-k weight
    1 / L_k, True the shifted weight 1 / L_(k+1). Both see the same vectors.
    """
    checks = []
    cat = catalog(d)
    for shifted in variants:
        for i, name in enumerate(norms or sorted(cat)):
            checks.append(_appendix_b_norm(cat[name], name, shifted, beta, alpha, D, n_x,
                                           make_rng(seed, 71, i), chunk))
    return _result("appendix-b", checks)


def _appendix_b_norm(unit, name, shifted, beta, alpha, D, n_x, rng, chunk):
    gs = symmetric_G(unit, beta, alpha, shifted=shifted)
    K = gs.level_bound
    far_at = 3.5 * alpha * D * K
    bad_near = bad_far = 0
    worst_near, worst_far = 0.0, math.inf
    for s in range(0, n_x, chunk):
        m = min(chunk, n_x - s)
        X = sample_vectors(unit.dim, m, rng)
        X /= unit.norm(X)[:, None]
        near = X * rng.uniform(0.0, 1.0, size=(m, 1))
        near[0] = X[0]  # keep an exact boundary case in every chunk
        g_near = gs.G(np.abs(near)).sum(axis=1)
        far = X * far_at * rng.uniform(1.0 + 1e-9, 3.0, size=(m, 1))
        g_far = gs.G(np.abs(far) / D).sum(axis=1)
        bad_near += int(np.sum(g_near > K * (1 + 1e-12)))
        bad_far += int(np.sum(g_far < alpha * K * (1 - 1e-12)))
        worst_near = max(worst_near, float(g_near.max() / K))
        worst_far = min(worst_far, float(g_far.min() / (alpha * K)))
    label = "appendix-b-shifted" if shifted else "appendix-b"
    return _check(f"{label}[{name}]", bad_near == 0 and bad_far == 0, vectors=n_x,
                  near_violations=bad_near, far_violations=bad_far, max_near_over_K=worst_near,
                  min_far_over_alphaK=worst_far, degenerate=bool(gs.degenerate))


# -- ring-soundness ------------------------------------------------------------

def clustered_points(n, d, rng, clusters: int = 8):
    centers = rng.standard_normal((clusters, d)) * 4.0
    scales = rng.uniform(0.2, 1.5, size=clusters)
    lab = rng.integers(0, clusters, size=n)
    return centers[lab] + rng.standard_normal((n, d)) * scales[lab, None]


def _oracle(kind):
    fns = {
        "l2": lambda X: np.sqrt(np.sum(X * X, axis=-1)),
        "l1": lambda X: np.sum(np.abs(X), axis=-1),
        "linf": lambda X: np.max(np.abs(X), axis=-1),
    }
    return DistanceOracle(fns[kind], name=kind)


def _unit_dirs(oracle, m, d, rng):
    Z = rng.standard_normal((m, d))
    return Z / oracle._fn(Z)[:, None]


def audit_tree(tree, oracle, rng, probes: int = 4) -> dict:
    """Check every Ring: growth condition, child coverage, and routing soundness for
    synthetic queries within r of each stored point and for stored pairs within r."""
    P, r, eps = tree.points, tree.r, tree.eps
    rings = lost = growth_bad = cover_bad = pairs = 0
    for node, _ in tree.nodes():
        if not isinstance(node, Ring):
            continue
        rings += 1
        S = node.ids
        ds = oracle.many(P[node.pivot], P[S])
        inner_ids, outer_ids = node_ids(node.inner), node_ids(node.outer)
        m = len(S)
        if (np.sum(ds <= node.reach) / m) ** (1 + eps) >= np.sum(ds <= node.R) / m:
            growth_bad += 1
        if not (np.array_equal(np.sort(inner_ids), np.sort(S[ds <= node.reach]))
                and np.array_equal(np.sort(outer_ids), np.sort(S[ds > node.R]))):
            cover_bad += 1
        in_set = np.isin(S, inner_ids)
        out_set = np.isin(S, outer_ids)
        # synthetic queries at distance r * f, f in (0, 1], around every stored point
        for _ in range(probes):
            f = rng.uniform(0.0, 1.0, size=m)
            f[: max(1, m // 4)] = 1.0
            Q = P[S] + r * f[:, None] * _unit_dirs(oracle, m, P.shape[1], rng)
            dq = oracle._fn(Q - P[node.pivot])
            go_in = dq <= (node.R + r) * (1 + TOL)
            lost += int(np.sum(np.where(go_in, ~in_set, ~out_set)))
        # stored pairs (q, p) with d(q, p) <= r: every p must follow q
        for a in range(m):
            near = oracle._fn(P[S] - P[S[a]]) <= r
            pairs += int(near.sum())
            go_in = node.goes_in(ds[a], r)
            lost += int(np.sum(near & (~in_set if go_in else ~out_set)))
    return {"rings": rings, "lost": lost, "growth_bad": growth_bad, "cover_bad": cover_bad, "pairs": pairs}


def ring_soundness(instances: int = 100, max_n: int = 500, eps: float = 0.5, seed: int = 0) -> dict:
    total = {"rings": 0, "lost": 0, "growth_bad": 0, "cover_bad": 0, "pairs": 0}
    for i in range(instances):
        rng = make_rng(seed, 9, i)
        n = int(rng.integers(20, max_n + 1))
        d = int(rng.choice([2, 3, 4, 8]))
        oracle = _oracle(["l2", "l1", "linf"][i % 3])
        P = clustered_points(n, d, rng)
        probe = oracle.many(P[0], P)
        r = float(np.quantile(probe[probe > 0], rng.uniform(0.01, 0.1)))
        tree = build_ring_tree(P, oracle, r, eps, leaf_cap=int(rng.integers(1, 9)), seed=i, keep_ids=True)
        out = audit_tree(tree, oracle, rng)
        for k in total:
            total[k] += out[k]
    return _result("ring-soundness", [
        _check("routing", total["lost"] == 0 and total["rings"] > 0, instances=instances, **total),
        _check("growth-condition", total["growth_bad"] == 0, rings=total["rings"]),
        _check("child-coverage", total["cover_bad"] == 0, rings=total["rings"]),
    ])


# -- space-recurrence ------------------------------------------------------------

def space_recurrence(instances: int = 20, n: int = 2000, eps: float = 0.5, seed: int = 0) -> dict:
    """Total leaf load <= 2 n^(1 + eps) and depth within the cap."""
    worst, depth_ok, loads, rings = 0.0, True, [], 0
    bound = 2.0 * n ** (1.0 + eps)
    for i in range(instances):
        rng = make_rng(seed, 10, i)
        d = int(rng.choice([2, 4, 8, 16]))
        oracle = _oracle(["l2", "l1", "linf"][i % 3])
        P = clustered_points(n, d, rng)
        probe = oracle.many(P[0], P)
        r = float(np.quantile(probe[probe > 0], rng.uniform(0.005, 0.05)))
        tree = build_ring_tree(P, oracle, r, eps, seed=i)
        load = tree.leaf_load()
        loads.append(load)
        rings += tree.stats.rings
        worst = max(worst, load / bound)
        depth_ok &= tree.stats.depth <= default_depth_cap(n, eps)
    return _result("space-recurrence", [
        _check("leaf-load", worst <= 1.0, instances=instances, bound=bound, max_load=max(loads), rings=rings,
               max_fraction_of_bound=worst),
        _check("depth-cap", depth_ok),
    ])


SUITES = {
    "lemma-4.7-identity": lemma47_identity,
    "sandwich": sandwich,
    "monte-carlo-3.1": monte_carlo_31,
    "appendix-b": appendix_b,
    "ring-soundness": ring_soundness,
    "space-recurrence": space_recurrence,
}


class UnknownSuite(KeyError):
    pass


def verify(names=None) -> dict:
    """Run suites by name (all when ``names`` is empty) and collect their results."""
    names = list(SUITES) if not names else list(names)
    for name in names:
        if name not in SUITES:
            raise UnknownSuite(name)
    results = [SUITES[name]() for name in names]
    return {"schema": "symann.verify/1", "passed": all(r["passed"] for r in results), "suites": results}
