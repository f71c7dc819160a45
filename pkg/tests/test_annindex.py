import math

import numpy as np
import pytest

from symann.annindex import (
    ClusterLeaf,
    DistanceOracle,
    Leaf,
    Ring,
    TreeDepthExceeded,
    build_general_pipeline,
    build_max_product_index,
    build_orlicz_pipeline,
    build_ring_tree,
    build_sum_product_index,
    build_symnorm_index,
    build_topk_pipeline,
    exact_scan,
    linf_distance,
    max_product_distance,
    node_ids,
    norm_distance,
    query_ring_tree,
    sum_product_distance,
)
from symann.annindex.oracle import IndexReport
from symann.bench.planted import gen_planted
from symann.gfunc import Huber
from symann.leveling import LevelParams
from symann.randmap import DegenerateNormError, RandMapParams
from symann.vecnorm import Lp, Orlicz, TopK, catalog, top_k_norm

L2 = DistanceOracle(lambda X: np.sqrt(np.sum(X * X, axis=-1)), name="l2")


def brute_nearest(P, q):
    d = [math.dist(p, q) for p in P]
    return int(np.argmin(d)), min(d)


def test_exact_scan(rng):
    assert exact_scan([[1.0, 2.0]], L2, [0.0, 0.0]).candidate == 0
    for _ in range(100):
        P = rng.standard_normal((int(rng.integers(1, 40)), 3))
        q = rng.standard_normal(3)
        rep = exact_scan(P, L2, q)
        i, d = brute_nearest(P, q)
        assert rep.candidate == i and rep.distance == pytest.approx(d)
    with pytest.raises(ValueError):
        exact_scan(np.empty((0, 3)), L2, np.zeros(3))
    with pytest.raises(ValueError):
        IndexReport(None, None, evals=-1)


def test_oracles_check(rng):
    P = rng.standard_normal((50, 6))
    for oracle in [norm_distance(catalog(6)["kfunc2"]), linf_distance(),
                   max_product_distance([(1, 1.0), (3, 0.5)]), sum_product_distance([(2, 1.0), (1, 2.0)], blocks=2)]:
        assert oracle.check(P, rng) == {"symmetry": 0, "identity": 0, "triangle": 0}
    X = rng.standard_normal((5, 6))
    mp = max_product_distance([(2, 1.0), (1, 3.0)], blocks=2)
    want = [max(top_k_norm(x[:3], 2), 3 * top_k_norm(x[3:], 1)) for x in X]
    np.testing.assert_allclose(mp.many(np.zeros(6), X), want)
    sp = sum_product_distance([(2, 1.0), (1, 3.0)], blocks=2)
    want = [top_k_norm(x[:3], 2) + 3 * top_k_norm(x[3:], 1) for x in X]
    np.testing.assert_allclose(sp.many(np.zeros(6), X), want)
    with pytest.raises(ValueError):
        max_product_distance([(1, 0.0)])
    with pytest.raises(ValueError):
        max_product_distance([(0, 1.0)])


def test_tree_one_point_and_validation():
    t = build_ring_tree(np.zeros((1, 2)), L2, 1.0)
    assert isinstance(t.root, Leaf)
    with pytest.raises(ValueError):
        build_ring_tree(np.zeros((0, 2)), L2, 1.0)
    with pytest.raises(ValueError):
        build_ring_tree(np.zeros((3, 2)), L2, 0.0)
    with pytest.raises(ValueError):
        build_ring_tree(np.zeros((3, 2)), L2, 1.0, eps=1.0)


def test_two_clusters_split():
    P = np.vstack([np.zeros((20, 2)), np.full((20, 2), 100.0 / math.sqrt(2))])
    t = build_ring_tree(P, L2, 1.0, leaf_cap=4)
    root = t.root
    assert isinstance(root, Ring)
    assert 0 <= root.R < 100 - 2
    a, b = node_ids(root.inner), node_ids(root.outer)
    assert 0 < len(a) < 40 and 0 < len(b) < 40
    assert set(a) | set(b) == set(range(40))
    # each side is a diameter-0 cluster
    assert isinstance(root.inner, ClusterLeaf) and isinstance(root.outer, ClusterLeaf)


def test_routing_rule_example():
    ring = Ring(pivot=0, R=2.0, slack=2.0)
    assert ring.goes_in(2.5, 1.0)
    assert not ring.goes_in(3.01, 1.0)
    assert ring.reach >= 4.0


def _audit(tree, oracle, P, r, eps):
    """Coverage, growth condition and routing of every stored near pair, recomputed from scratch."""
    lost = bad = 0
    for node, _ in tree.nodes():
        if not isinstance(node, Ring):
            continue
        S = node.ids
        ds = np.array([oracle(P[node.pivot], P[i]) for i in S])
        inner, outer = set(node_ids(node.inner)), set(node_ids(node.outer))
        assert inner | outer == set(S)
        assert inner >= set(S[ds <= node.R + 2 * r])
        assert outer == set(S[ds > node.R])
        m = len(S)
        bad += (np.sum(ds <= node.reach) / m) ** (1 + eps) >= np.sum(ds <= node.R) / m
        for a in range(m):
            go = inner if ds[a] <= node.R + r else outer
            for b in range(m):
                if oracle(P[S[a]], P[S[b]]) <= r and S[b] not in go:
                    lost += 1
    return lost, bad


@pytest.mark.parametrize("seed", range(6))
def test_routing_soundness_exhaustive(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(30, 150))
    P = rng.standard_normal((8, 3))[rng.integers(0, 8, n)] * 3 + rng.standard_normal((n, 3))
    r = float(rng.uniform(0.2, 1.0))
    tree = build_ring_tree(P, L2, r, eps=0.5, leaf_cap=int(rng.integers(1, 6)), seed=seed, keep_ids=True)
    assert _audit(tree, L2, P, r, 0.5) == (0, 0)
    # the routed leaf contains every point within r of the query
    for _ in range(30):
        q = P[rng.integers(n)] + rng.standard_normal(3) * r / 3
        near = {i for i in range(n) if math.dist(P[i], q) <= r}
        node = tree.root
        while isinstance(node, Ring):
            node = node.inner if node.goes_in(L2(q, P[node.pivot]), r) else node.outer
        assert near <= set(node.ids)


def test_space_bound(rng):
    P = rng.standard_normal((600, 4))
    tree = build_ring_tree(P, L2, 0.3, eps=0.5)
    assert tree.leaf_load() <= 2 * 600**1.5
    assert tree.stats.stored == tree.leaf_load()


def test_depth_cap_is_explicit(rng):
    P = rng.standard_normal((300, 2))
    with pytest.raises(TreeDepthExceeded):
        build_ring_tree(P, L2, 0.01, depth_cap=1, leaf_cap=1)


def test_query_planted_and_identity(rng):
    norm = Lp(4, 2)
    c_cl = 1.0
    for seed in range(100):
        inst = gen_planted(norm, 80, 4, 1.0, 1 + c_cl + 0.5, seed)
        tree = build_ring_tree(inst.points, L2, 1.0, c_cl=c_cl, seed=seed)
        rep = query_ring_tree(tree, L2, inst.query)
        assert rep.distance <= (1 + c_cl) * 1.0 + 1e-9
    P = rng.standard_normal((50, 4))
    tree = build_ring_tree(P, L2, 0.5)
    rep = query_ring_tree(tree, L2, P[17])
    assert rep.distance == 0.0


def test_topk_pipeline_planted():
    d, k, n = 16, 4, 300
    params = RandMapParams(0.3, 2.0, 2.0, seed=5)
    norm = TopK(d, k)
    inst = gen_planted(norm, n, d, 1.0, params.alpha * params.D, seed=1, n_queries=40)
    pipe = build_topk_pipeline(inst.points, k, params)
    assert pipe.reps == math.ceil(n**0.5)
    hits = 0
    for q, pid in zip(inst.queries, inst.planted):
        rep = pipe.query(q)
        if rep.candidate is not None:
            assert rep.distance <= params.alpha * params.D + 1e-9
            hits += rep.candidate == pid
    assert hits / len(inst.queries) >= 0.55


def test_pipeline_identical_points():
    P = np.ones((10, 4))
    params = RandMapParams(0.3, 2.0, 2.0, seed=0)
    pipe = build_orlicz_pipeline(P, Orlicz(4, Huber(1.0)), Huber(1.0), params, 1.0)
    rep = pipe.query(np.ones(4))
    assert rep.candidate == 0 and rep.distance == 0


def test_general_pipeline():
    d = 12
    norm = catalog(d)["top3"]
    params = RandMapParams(0.3, 2.0, 2.0, seed=3)
    inst = gen_planted(norm, 200, d, 1.0, 4.0, seed=2, n_queries=10)
    pipe = build_general_pipeline(inst.points, norm, params, reps=8)
    for q in inst.queries:
        rep = pipe.query(q)
        if rep.candidate is not None:
            assert rep.distance <= pipe.threshold
    with pytest.raises(DegenerateNormError):
        build_general_pipeline(inst.points, catalog(d)["linf"], params)


def test_max_product_index(rng):
    P = rng.standard_normal((200, 6))
    idx = build_max_product_index(P, [(1, 1.0)], 0.5)
    lin = linf_distance()
    for i in range(20):
        q = P[i] + rng.uniform(-0.1, 0.1, 6)
        rep = idx.query(q)
        assert rep.distance <= 2 * 0.5 or rep.distance == pytest.approx(exact_scan(P, lin, q).distance)
    oracle = max_product_distance([(2, 1.0), (1, 0.5)], blocks=2)
    assert oracle.check(P, rng, trials=10_000)["triangle"] == 0


def test_sum_product_survival():
    # one near pair under the l1-product; some repetition must route it correctly
    m, mu, reps, trials = 4, 0.3, 6, 300
    factors = [(1, 1.0)] * m
    hits = 0
    for t in range(trials):
        rng = np.random.default_rng(t)
        far = rng.standard_normal((30, m)) * 20
        near = rng.dirichlet(np.ones(m)) * 0.9
        P = np.vstack([near, far])
        idx = build_sum_product_index(P, factors, RandMapParams(mu, 2.0, 2.0, seed=t), reps, blocks=m)
        hits += idx.query(np.zeros(m)).candidate == 0
    want = 1 - (1 - mu) ** reps
    assert hits / trials >= want - 3 * math.sqrt(want * (1 - want) / trials)


@pytest.mark.parametrize("mode", ["direct", "nested"])
def test_symnorm_index(mode):
    d = 8
    norm = catalog(d)["l1"]
    p = LevelParams(1.5, d)
    inst = gen_planted(norm, 300, d, 1.0, 4.0, seed=4, n_queries=30)
    idx = build_symnorm_index(inst.points, norm, p, mode=mode, seed=1)
    hits = 0
    for q, pid in zip(inst.queries, inst.planted):
        rep = idx.query(q)
        if rep.candidate is not None:
            assert rep.distance <= 4.0 + 1e-9
            hits += rep.candidate == pid
    assert hits / 30 >= (0.9 if mode == "direct" else 0.3)
    with pytest.raises(ValueError):
        build_symnorm_index(inst.points, norm, p, mode="other", spec=idx.spec)


def test_embedded_distance_bounds(rng):
    d = 8
    norm = catalog(d)["minimal_sqrt"]
    p = LevelParams(1.5, d)
    idx = build_symnorm_index(rng.standard_normal((20, d)), norm, p)
    lo, hi = idx.spec.distortion_bounds()
    X, Y = rng.standard_normal((500, d)), rng.standard_normal((500, d))
    est = idx.oracles[0]._fn(X - Y)
    true = norm.norm(X - Y)
    assert np.all(est >= lo * true - 1e-12)
    assert np.all(est <= (2.25 + 8 * 0.5) * true + 1e-12)
