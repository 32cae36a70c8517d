"""Exact regions of the binary adder MAC, Y = X1 + X2.

With uniform independent inputs each user gets 1 bit and the sum is
capped at H(Y) = 1.5 bits.  A search over input laws with an auxiliary U
shows how correlation through U raises the total (common) rate.
"""

import numpy as np

from coopmac import ConferencingSpec, DiscreteChannelSpec, InputLaw, region_for_law, willems_region
from coopmac.discrete import brute_force_region
from coopmac.region import support_value, vertices

adder = DiscreteChannelSpec.binary_adder()
uniform = InputLaw.independent([0.5, 0.5], [0.5, 0.5])
cs = region_for_law(adder, uniform)
print("subset bounds a[L]:", cs.subset_bounds[0].tolist(), " total:", cs.total_bounds[0])
print("corners (R0, R1, R2):")
for v in vertices(cs):
    print("   ", np.round(v.as_array(), 4))

# Conferencing: credited subset bounds plus the uncredited sum bound I(X1, X2; Y).
for c in (0.0, 0.25, 10.0):
    conf = willems_region(adder, uniform, ConferencingSpec(c, c))
    print(f"C = {c}: max R1 = {support_value(conf, [1, 0])[0]:.3f}, "
          f"max R1 + R2 = {support_value(conf, [1, 1])[0]:.3f}")

front = brute_force_region(adder, grid_step=1 / 8, u_size_cap=2,
                           weights=[[0, 1, 1], [1, 1, 1], [1, 0, 0]])
print(f"searched {front.laws_searched} laws")
for w, val in zip(front.weights, front.best_values):
    print(f"  best {w} . R = {val:.4f}")
