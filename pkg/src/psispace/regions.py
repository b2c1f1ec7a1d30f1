"""Compact regions K and open domains U in R^n."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Ball", "Box", "WholeSpace", "region_from_dict"]


def _as_points(points):
    pts = np.asarray(points, dtype=float)
    return pts[None, :] if pts.ndim == 1 else pts


@dataclass(frozen=True)
class Ball:
    """Euclidean ball. Closed when used as a compact region, open as a domain."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.ravel(self.center)))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"ball radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    def _norms(self, points):
        diff = _as_points(points) - np.asarray(self.center)
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def contains(self, points):
        return self._norms(points) <= self.radius

    def distance(self, points):
        """Distance from each point to the closed region (0 inside)."""
        return np.maximum(self._norms(points) - self.radius, 0.0)

    def distance_to_complement(self, points):
        """Distance from each point to R^n minus the open ball (0 outside)."""
        return np.maximum(self.radius - self._norms(points), 0.0)

    def dilate(self, h):
        return Ball(self.center, self.radius + h)

    def to_dict(self):
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo_1, hi_1] x ... x [lo_n, hi_n]``."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(c) for c in np.ravel(self.lo))
        hi = tuple(float(c) for c in np.ravel(self.hi))
        if len(lo) != len(hi):
            raise ValueError("box corners must have the same dimension")
        if not all(np.isfinite(a) and np.isfinite(b) and a < b for a, b in zip(lo, hi)):
            raise ValueError(f"box must satisfy lo < hi with finite bounds, got {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, dim, lo, hi):
        return cls((lo,) * dim, (hi,) * dim)

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, points):
        pts = _as_points(points)
        return np.all((pts >= np.asarray(self.lo)) & (pts <= np.asarray(self.hi)), axis=-1)

    def distance(self, points):
        pts = _as_points(points)
        gap = np.maximum(np.asarray(self.lo) - pts, 0.0) + np.maximum(pts - np.asarray(self.hi), 0.0)
        return np.sqrt(np.sum(gap * gap, axis=-1))

    def distance_to_complement(self, points):
        pts = _as_points(points)
        inner = np.minimum(pts - np.asarray(self.lo), np.asarray(self.hi) - pts)
        return np.maximum(inner.min(axis=-1), 0.0)

    def dilate(self, h):
        """Smallest box containing the h-neighbourhood (a superset of the true dilation)."""
        return Box(tuple(a - h for a in self.lo), tuple(b + h for b in self.hi))

    def to_dict(self):
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class WholeSpace:
    """The domain U = R^n."""

    def distance_to_complement(self, points):
        return np.full(_as_points(points).shape[0], np.inf)

    def to_dict(self):
        return {"kind": "whole"}


def region_from_dict(data):
    if data is None:
        return WholeSpace()
    kind = data.get("kind")
    if kind == "whole":
        return WholeSpace()
    if kind == "ball":
        return Ball(data["center"], data["radius"])
    if kind == "box":
        return Box(data["lo"], data["hi"])
    raise ValueError(f"unknown region kind {kind!r}")
