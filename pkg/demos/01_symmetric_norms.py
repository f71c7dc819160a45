"""
Symmetric norms and their duals
===============================

A tour of the norm catalog: values, duals, subgradients, and the top-k
building blocks every symmetric norm reduces to.
"""

import numpy as np

from symann.vecnorm import KFunctional, Minimal, catalog, top_k_norm, weakly_majorizes

rng = np.random.default_rng(0)
d = 8
cat = catalog(d)
x = rng.standard_normal(d)

# every catalog norm is rescaled so the first basis vector has norm 1
for name, norm in sorted(cat.items()):
    print(f"{name:14s} ||x|| = {norm.norm(x):8.4f}   ||x||_* = {norm.dual(x):8.4f}")

###############################################################################
# Top-k norms sum the k largest magnitudes; k = 1 is l_inf and k = d is l_1.
print([round(top_k_norm(x, k), 4) for k in (1, 3, d)])

###############################################################################
# The minimal norm for a_k = sqrt(k) takes the largest scaled prefix average.
m = Minimal.sqrt(4)
print(m.norm([3.0, 1.0, 1.0, 1.0]))  # 3.0

# The K-functional mixes l_1 and l_2; on the flat vector with t = 1 all mass is l_2.
print(KFunctional(4, 1.0).norm(np.ones(4)))  # 2.0

###############################################################################
# A subgradient g has <g, x> = ||x|| and unit dual norm.
norm = cat["orlicz_huber"]
g = norm.subgradient(x)
print(float(g @ x), norm.norm(x), norm.dual(g))

###############################################################################
# Symmetric norms are monotone under weak majorization: averaging coordinates
# can only lower the norm.
y = x.copy()
y[:2] = x[:2].mean()
print(weakly_majorizes(x, y), all(n.norm(y) <= n.norm(x) + 1e-12 for n in cat.values()))
