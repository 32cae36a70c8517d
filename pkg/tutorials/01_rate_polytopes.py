"""Rate polytopes: build a region, list its corners, test points.

A two-user Gaussian MAC with unit gains, unit noise and unit powers has
single-user bounds C(1) = 0.5 and a sum bound C(2).  Its corners are the
two successive-decoding points.
"""

import numpy as np

from coopmac.expectation import capacity_fn
from coopmac.region import (
    RateConstraintSet,
    RatePoint,
    check_submodular,
    membership,
    support_value,
    vertices,
)

pentagon = RateConstraintSet.from_bounds(
    {(0,): capacity_fn(1.0), (1,): capacity_fn(1.0), (0, 1): capacity_fn(2.0)},
    has_common=False,
)
print("corners:")
for v in vertices(pentagon):
    print("   ", np.round(v.as_array(), 6))

# Submodularity of the bound function is what makes the corner list this short.
print("submodular:", check_submodular(pentagon)[0])

# Membership names the first violated constraint.
for rates in [(0.2, 0.2), (0.45, 0.45), (0.6, 0.0)]:
    res = membership(RatePoint(rates), pentagon)
    print(rates, "inside" if res else f"outside, violates {res.violation}")

# Support values trace the boundary: max of w . R over the region.
for t in np.linspace(0, np.pi / 2, 5):
    w = (np.cos(t), np.sin(t))
    value, point = support_value(pentagon, w)
    print(f"w=({w[0]:.2f}, {w[1]:.2f})  value={value:.4f}  at {np.round(point.as_array(), 4)}")

# With a common message the polytope gains an R0 axis bounded by the total.
common = RateConstraintSet.from_bounds(
    {(0,): 0.5, (1,): 0.5, (0, 1): capacity_fn(2.0)}, total=capacity_fn(4.0))
print("largest common rate:", support_value(common, [1, 0, 0])[0])
