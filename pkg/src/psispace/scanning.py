"""
Scanning: the section p -> (local affine picture of W near p, or infinity).

Near p the submanifold is replaced by the affine plane through its nearest
sample x* with tangent plane T_{x*}W, recorded as the offset of that plane
from p (the component of x* - p normal to the plane). Points farther than the
scan radius, and points with two well-separated nearest candidates, map to the
point at infinity of the fibre. Sections are compared by a weighted sup over a
finite grid of base points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import INFINITY, GrassPlane, grassmann_distances

__all__ = [
    "AffinePlane",
    "ScanSection",
    "scan_at",
    "scan_section",
    "section_distance",
    "scan_metric",
    "box_grid",
    "default_grid",
    "fiber_gauge",
    "AMBIGUITY_FACTOR",
    "MAX_GRID_POINTS",
]

AMBIGUITY_FACTOR = 1.05
NEIGHBOURHOOD_SCALE = 3.0
MAX_GRID_POINTS = 1_000_000
DEFAULT_RHO = 1.0


@dataclass(frozen=True, eq=False)
class AffinePlane:
    """Affine d-plane ``p + offset + plane`` seen from a base point p; ``offset`` is normal to ``plane``."""

    offset: np.ndarray
    plane: GrassPlane

    def __post_init__(self):
        off = np.array(self.offset, dtype=float).reshape(-1)
        if off.shape[0] != self.plane.ambient_dim:
            raise ValueError("offset and plane live in different dimensions")
        if np.max(np.abs(self.plane.frame.T @ off), initial=0.0) > 1e-9 * max(1.0, np.linalg.norm(off)):
            raise ValueError("offset must be orthogonal to the plane")
        off.setflags(write=False)
        object.__setattr__(self, "offset", off)


def box_grid(axes):
    """Tensor grid from per-axis ``(start, stop, step)`` triples (stop inclusive)."""
    ticks = []
    total = 1
    for a, b, s in axes:
        if not (s > 0 and b >= a):
            raise ValueError(f"invalid grid axis {a}:{b}:{s}")
        k = int(math.floor((b - a) / s + 1e-9)) + 1
        total *= k
        if total > MAX_GRID_POINTS:
            raise ValueError(f"grid too large: more than {MAX_GRID_POINTS} points")
        ticks.append(a + s * np.arange(k))
    mesh = np.meshgrid(*ticks, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def default_grid(n):
    """Grid on [-2, 2]^n with spacing 0.25 (n <= 2) or 0.5 (n >= 3)."""
    step = 0.25 if n <= 2 else 0.5
    return box_grid([(-2.0, 2.0, step)] * n)


def _scan_many(W, points, rho, tree=None):
    """Finite mask, offsets and frames of the scan at each base point."""
    points = np.asarray(points, dtype=float)
    k, n, d = points.shape[0], W.ambient_dim, W.intrinsic_dim
    finite = np.zeros(k, dtype=bool)
    offsets = np.zeros((k, n))
    frames = np.zeros((k, n, d))
    if len(W) == 0 or k == 0:
        return finite, offsets, frames
    tree = cKDTree(W.positions) if tree is None else tree
    kk = min(len(W), 8)
    dist, idx = tree.query(points, k=kk)
    dist = np.asarray(dist).reshape(k, kk)
    idx = np.asarray(idx).reshape(k, kk)
    # ties go to the lowest sample index
    near = np.where(dist == dist[:, :1], idx, np.iinfo(np.int64).max).min(axis=1)
    best = dist[:, 0]
    sep = NEIGHBOURHOOD_SCALE * W.resolution
    for i in range(k):
        # sample spacing may push the nearest sample up to h past the true foot point
        if best[i] > rho + W.resolution:
            continue
        x_star = W.positions[near[i]]
        cand = tree.query_ball_point(points[i], AMBIGUITY_FACTOR * best[i])
        if cand:
            spread = np.linalg.norm(W.positions[cand] - x_star, axis=1).max()
            if spread > max(sep, best[i]):
                continue
        frame = W.frames[near[i]]
        v = x_star - points[i]
        off = v - frame @ (frame.T @ v)
        if np.sqrt(off @ off) > rho:
            continue
        finite[i] = True
        offsets[i] = off
        frames[i] = frame
    return finite, offsets, frames


def scan_at(W, p, rho=DEFAULT_RHO):
    """Scan of W at base point p: an ``AffinePlane`` or ``INFINITY``.

    ``INFINITY`` when the normal offset exceeds ``rho``, when the nearest sample
    is farther than ``rho + h``, or when some sample within ``AMBIGUITY_FACTOR``
    times the nearest distance lies farther than ``max(3h, nearest distance)``
    from the nearest sample.
    """
    if not rho > 0:
        raise ValueError("scan radius must be positive")
    finite, offsets, frames = _scan_many(W, np.asarray(p, dtype=float)[None], rho)
    if not finite[0]:
        return INFINITY
    return AffinePlane(offsets[0], GrassPlane(frames[0]))


@dataclass(frozen=True, eq=False)
class ScanSection:
    """Scan values of one manifold on a finite grid of base points."""

    grid: np.ndarray
    finite: np.ndarray
    offsets: np.ndarray
    frames: np.ndarray
    rho: float

    def __len__(self):
        return self.grid.shape[0]

    def value(self, i):
        if not self.finite[i]:
            return INFINITY
        return AffinePlane(self.offsets[i], GrassPlane(self.frames[i]))

    @property
    def values(self):
        return [self.value(i) for i in range(len(self))]

    def to_csv(self):
        n, d = self.offsets.shape[1], self.frames.shape[2]
        head = (
            [f"p{j}" for j in range(n)] + ["finite"] + [f"o{j}" for j in range(n)]
            + [f"f{a}{b}" for a in range(n) for b in range(d)]
        )
        lines = [",".join(head)]
        for i in range(len(self)):
            row = [repr(float(c)) for c in self.grid[i]]
            if self.finite[i]:
                row.append("1")
                row += [repr(float(c)) for c in self.offsets[i]]
                row += [repr(float(c)) for c in self.frames[i].reshape(-1)]
            else:
                row.append("0")
                row += [""] * (n + n * d)
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def scan_section(W, grid=None, rho=DEFAULT_RHO):
    """Evaluate the scan of W at every grid point (default: ``default_grid``)."""
    if not rho > 0:
        raise ValueError("scan radius must be positive")
    grid = default_grid(W.ambient_dim) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.shape[0] == 0 or grid.shape[1] != W.ambient_dim:
        raise ValueError("grid must be a non-empty (k, n) array")
    if grid.shape[0] > MAX_GRID_POINTS:
        raise ValueError(f"grid too large: more than {MAX_GRID_POINTS} points")
    finite, offsets, frames = _scan_many(W, grid, rho)
    return ScanSection(grid, finite, offsets, frames, float(rho))


def fiber_gauge(offset_norms, rho):
    """Vanishing weight on a fibre: ``min(1, rho) * (1 - |offset| / rho)``, clipped at 0.

    It is at most 1-Lipschitz and reaches 0 at the scan radius, so an affine plane
    drifting out of the scan window tends continuously to the point at infinity.
    """
    return min(1.0, rho) * np.maximum(1.0 - np.asarray(offset_norms) / rho, 0.0)


def section_distance(s, s2):
    """Weighted sup over the grid of the compactified fibre distance.

    ``max_p w(p) * dhat(s(p), s2(p))`` with ``w(p) = 1 / (1 + |p|)`` and
    ``dhat = min(|o - o'| + d1(P, P'), g(o) + g(o'))`` (``g`` = ``fiber_gauge``),
    ``g(o)`` against infinity and 0 between two infinities.
    """
    if s.grid.shape != s2.grid.shape or not np.array_equal(s.grid, s2.grid) or s.rho != s2.rho:
        raise ValueError("grid mismatch: sections were evaluated on different grids or radii")
    if s.frames.shape[1:] != s2.frames.shape[1:]:
        raise ValueError("dimension mismatch between sections")
    g1 = fiber_gauge(np.linalg.norm(s.offsets, axis=1), s.rho)
    g2 = fiber_gauge(np.linalg.norm(s2.offsets, axis=1), s2.rho)
    both = s.finite & s2.finite
    dist = np.zeros(len(s))
    diff = s.offsets[both] - s2.offsets[both]
    close = np.sqrt(np.sum(diff * diff, axis=1)) + grassmann_distances(s.frames[both], s2.frames[both])
    dist[both] = np.minimum(close, g1[both] + g2[both])
    only1 = s.finite & ~s2.finite
    only2 = s2.finite & ~s.finite
    dist[only1] = g1[only1]
    dist[only2] = g2[only2]
    w = 1.0 / (1.0 + np.linalg.norm(s.grid, axis=1))
    return float(np.max(w * dist))


def scan_metric(W, W2, grid=None, rho=DEFAULT_RHO):
    """Pullback of ``section_distance`` along the scan."""
    if (W.ambient_dim, W.intrinsic_dim) != (W2.ambient_dim, W2.intrinsic_dim):
        raise ValueError("dimension mismatch between W and W'")
    grid = default_grid(W.ambient_dim) if grid is None else grid
    return section_distance(scan_section(W, grid, rho), scan_section(W2, grid, rho))
