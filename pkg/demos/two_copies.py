"""
Two parallel copies of a circle
===============================

A pair of circles at radii 1 - delta and 1 + delta approaches the unit circle
as point sets with tangent planes, yet it is never the image of a single
normal section. The Gauss-image distance sees the first fact, the volume graph
and the global-section neighbourhoods see the second.
"""

import numpy as np

from psispace import manifolds as M
from psispace.metrics import fell_hausdorff, volume_pseudodistance
from psispace.neighborhoods import NeighborhoodSpec, in_gs_neighborhood, in_ls_neighborhood
from psispace.regions import Box

W = M.circle(count=512)
K = Box([-1.0, -1.0], [1.0, 1.0])
spec = NeighborhoodSpec(K, eps=0.5)

print(f"{'delta':>7} {'d_H':>9} {'d_nu':>9} {'gs':>6} {'ls':>6}")
for delta in (0.1, 0.05, 0.01, 0.005):
    copies = M.parallel_copies(W, delta)
    print(
        f"{delta:7.3f} {fell_hausdorff(W, copies):9.5f} {volume_pseudodistance(W, copies):9.5f} "
        f"{str(in_gs_neighborhood(W, copies, spec).member):>6} {str(in_ls_neighborhood(W, copies, spec).member):>6}"
    )

# d_H shrinks like delta while d_nu stays put: the volume of the copies is twice
# that of W, so the completed volume graphs keep a jump of 2*pi apart.
# Compare with a single normal shift, which converges in every sense.
for delta in (0.1, 0.01, 0.001):
    shifted = M.perturb_normal(W, delta)
    print(f"shift {delta:6.3f}: d_H = {fell_hausdorff(W, shifted):.5f}, d_nu = {volume_pseudodistance(W, shifted):.5f}")

# The volume functions themselves: one jump for W, two for the copies.
from psispace.metrics import default_r_grid, volume_function

copies = M.parallel_copies(W, 0.1)
grid = default_r_grid(W, copies)
for name, X in (("W", W), ("copies", copies)):
    jumps = volume_function(X, grid).jumps
    print(name, np.round(jumps, 4).tolist())
