"""
Rounding vectors and building a top-k net
=========================================

Vectors are grouped into levels (beta^-(k+1), beta^-k], counts are rounded to
floor(beta^j), and dominated levels are dropped. The surviving count patterns in
the scaled dual ball form a net whose rows give a max of top-k combinations that
approximates the norm.
"""

import numpy as np

from symann.leveling import LevelParams, counts_to_vector, level_vector, levels, rounded, simplify
from symann.netgen import build_embedding, embedded_eval, enumerate_rounded_dual_set
from symann.vecnorm import catalog

p = LevelParams(1.5, 8)
print(p, "levels:", p.n_levels, "window offset:", round(p.window_offset, 4))

x = np.array([1.0, 0.8, 0.5, 0.3, 0.3, 0.01, 0.0, 0.0])
print(levels(x, p))
print(level_vector(x, p))
print(rounded(x, p))

###############################################################################
# simplify drops a level when a much higher level already holds as many entries.
c = np.zeros(p.n_levels, dtype=int)
c[0], c[6] = 4, 3
print(simplify(counts_to_vector(c, p), p))

###############################################################################
# Enumerate the rounded dual set and the net for l_2.
norm = catalog(8)["l2"]
rhat = enumerate_rounded_dual_set(norm, p)
spec = build_embedding(norm, p)
print(f"|R-hat| = {len(rhat)}, net size t = {spec.t}, rows attaining the max: {len(spec.eval_rows)}")

###############################################################################
# The embedded estimate stays between (1 - tau d) ||x|| and beta^2 ||x||.
rng = np.random.default_rng(1)
X = rng.standard_normal((1000, 8))
ratio = embedded_eval(spec, X) / norm.norm(X)
print(f"estimate / norm in [{ratio.min():.4f}, {ratio.max():.4f}]; "
      f"bounds [{1 - p.tau * p.d:.4f}, {p.beta ** 2 * 1.02:.4f}]")

# coefficients c_k = y_k - y_(k+1) turn each row into a sum of top-k norms
print(spec.coeffs[0])
