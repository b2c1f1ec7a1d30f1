"""
Scanning a submanifold
======================

At each base point p the scan records the affine tangent plane of W through
its nearest sample, or the point at infinity when W is too far away or the
nearest point is ambiguous. Two submanifolds are compared by a weighted sup of
fibrewise distances over a grid of base points.
"""

import numpy as np

from psispace import manifolds as M
from psispace.scanning import box_grid, scan_at, scan_metric, scan_section

line = M.affine_plane(extent=3.0, count=601)
circle = M.circle(count=512)

# Near the x-axis the scan is the horizontal line seen from p.
for p in ([0.0, 0.2], [0.5, -0.7], [0.0, 1.5]):
    print(p, scan_at(line, p))

# The centre of the circle is equidistant from every sample: infinity.
print("circle at origin:", scan_at(circle, [0.0, 0.0]))

# A coarse picture of which base points see the circle.
grid = box_grid([(-2.0, 2.0, 0.5)] * 2)
section = scan_section(circle, grid)
picture = np.where(section.finite, "#", ".").reshape(9, 9).T[::-1]
print("\n".join("".join(row) for row in picture))

# Normal shifts converge in the scan metric; a rotated line does not.
for delta in (0.1, 0.01, 0.001):
    print(f"shift {delta}: {scan_metric(circle, M.perturb_normal(circle, delta)):.5f}")
c, s = np.cos(0.5), np.sin(0.5)
print("line vs rotated line:", scan_metric(line, M.rotate(line, np.array([[c, -s], [s, c]]))))
