"""
Near neighbor search: ring trees and pipelines
==============================================

A ring tree answers near neighbor queries over any distance oracle. The
pipelines wrap it: random scalings for Orlicz norms, and the top-k net
embedding for general symmetric norms.
"""

import numpy as np

from symann.annindex import build_orlicz_pipeline, build_ring_tree, build_symnorm_index, query_ring_tree
from symann.annindex import norm_distance
from symann.bench.planted import gen_planted
from symann.gfunc import Huber
from symann.leveling import LevelParams
from symann.randmap import RandMapParams
from symann.vecnorm import Orlicz, catalog

d = 12
norm = catalog(d)["minimal_sqrt"]
inst = gen_planted(norm, 1000, d, r=1.0, sep=4.0, seed=0, n_queries=50)

###############################################################################
# A plain ring tree over the true distance.
oracle = norm_distance(norm)
tree = build_ring_tree(inst.points, oracle, r=1.0, seed=0)
print(tree.stats)
hits = sum(query_ring_tree(tree, oracle, q).candidate == pid for q, pid in zip(inst.queries, inst.planted))
print(f"ring tree: {hits}/50 planted neighbors found")

###############################################################################
# The symmetric-norm index routes with the embedded estimate and checks
# candidates with the true norm.
idx = build_symnorm_index(inst.points, norm, LevelParams(1.5, d), mode="direct", accept_factor=4.0)
hits = sum(idx.query(q).candidate == pid for q, pid in zip(inst.queries, inst.planted))
print(f"symnorm direct: {hits}/50, net size {idx.spec.t}")

###############################################################################
# Orlicz norms go through random scalings into l_inf trees.
hub = Orlicz(d, Huber(1.0))
inst2 = gen_planted(hub, 500, d, 1.0, 16.0, seed=1, n_queries=50)
pipe = build_orlicz_pipeline(inst2.points, hub, hub.G, RandMapParams(0.2, 2.0, 8.0, seed=0), r=1.0, reps=5)
hits = sum(pipe.query(q).candidate == pid for q, pid in zip(inst2.queries, inst2.planted))
print(f"orlicz pipeline: {hits}/50 with {pipe.reps} repetitions")
