"""
Random coordinate scalings into l_inf
=====================================

Dividing each coordinate by an independent u_i with Pr[u <= t] = 1 - mu^G(t)
keeps a unit vector of the Orlicz norm inside the l_inf unit ball with
probability about mu, and pushes a long vector outside the D-ball with
probability at least 1 - mu^alpha.
"""

import numpy as np

from symann.gfunc import Power
from symann.randmap import RandMapParams, sample_scalings, symmetric_G
from symann.vecnorm import Lp, catalog

mu, alpha, D, d = 0.3, 3.0, 4.0, 16
params = RandMapParams(mu, D, alpha, seed=0)
norm = Lp(d, 2)
x = np.random.default_rng(2).standard_normal(d)
x /= norm.norm(x)

U = np.stack([sample_scalings(Power(2.0), params, d, rep=i).u for i in range(20000)])
inside = np.mean(np.max(np.abs(x) / U, axis=1) <= 1)
outside = np.mean(np.max(np.abs(1.05 * alpha * D * x) / U, axis=1) > D)
print(f"Pr[inside] = {inside:.3f} (mu = {mu}),  Pr[outside D] = {outside:.3f} (>= {1 - mu**alpha:.3f})")

###############################################################################
# For a general symmetric norm the G counts coordinates per level, weighted by
# the fewest coordinates at that level that leave the unit ball.
for name in ("l1", "top3", "minimal_sqrt"):
    s = symmetric_G(catalog(64)[name], 1.5, 2.0)
    print(name, s.L[:6])

# top-3 needs three level-2 coordinates but no number of level-3 ones, so
# the shifted weights 1 / L_(k+1) are the ones that bound sum G on the unit ball
print(symmetric_G(catalog(64)["top3"], 1.5, 2.0, shifted=True).L[:6])
