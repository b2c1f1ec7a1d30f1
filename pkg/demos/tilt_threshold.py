"""
Where a tilted line leaves a neighbourhood
==========================================

Over the x-axis the line y = m x is the image of the section f(x) = m x. On the
square K = [-1, 1]^2 the size |f| + |Df| peaks at |x| = 1 with value 2m, so the
line lies in the global-section neighbourhood (K, eps) exactly when 2m < eps.
"""

import numpy as np

from psispace import manifolds as M
from psispace.neighborhoods import NeighborhoodSpec, in_gs_neighborhood
from psispace.regions import Box

W = M.affine_plane(extent=1.5, count=1201)
K = Box([-1.0, -1.0], [1.0, 1.0])
eps = 0.5

for m in np.arange(0.20, 0.30, 0.01):
    report = in_gs_neighborhood(W, M.perturb_normal(W, m, mode="tilt"), NeighborhoodSpec(K, eps))
    print(f"m = {m:.2f}  2m = {2 * m:.2f}  member = {report.member}  {report.violated() or ''}")
