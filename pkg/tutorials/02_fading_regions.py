"""Ergodic regions of a two-user Rayleigh fading MAC.

Every bound is an expectation over the fading state.  Gauss-Laguerre
quadrature and Monte Carlo give two independent estimates; comparing them
is the standard sanity check for each number below.
"""

import numpy as np

from coopmac import (
    ConferencingSpec,
    FadingChannelSpec,
    MonteCarlo,
    PolicyGrid,
    Quadrature,
    max_common_rate,
    region_no_csit,
)
from coopmac.fading import add_conferencing, best_support, direction_weights, policy_regions

spec = FadingChannelSpec.two_user(100.0, 100.0)  # 20 dB each, unit noise

# Largest common rate: both transmitters send only the common signal, coherently.
quad = max_common_rate(spec, Quadrature(64), full=True)
mc = max_common_rate(spec, MonteCarlo(1_000_000, seed=0), full=True)
print(f"max common rate  quad={quad.value:.5f}  mc={mc.value:.5f} +- {mc.std_error:.1e}")

# One policy: constant correlations rho1, rho2 without transmitter CSI.
grid = Quadrature(64).draw(spec)
cs = region_no_csit(spec, 0.5, 0.5, grid)
print("bounds for rho = (0.5, 0.5):", np.round(cs.subset_bounds[0, 1:], 4),
      "total", round(float(cs.total_bounds[0]), 4))

# Conferencing links turn the common-message region into a private-rate region.
# Once the links carry the whole common rate, the region is a triangle.
policies, regions = policy_regions(spec, None, PolicyGrid(21), grid)
w = direction_weights(7)
for c in (0.0, 1.0, 2.0, quad.value):
    conf = ConferencingSpec(c, c)
    values, points, idx = best_support([add_conferencing(r, conf) for r in regions], w)
    print(f"C = {c:.3f}:  R1 + R2 max = {values[3] / w[3][0]:.4f}, "
          f"axis cut-off R1 = {points[0][0]:.4f}")
