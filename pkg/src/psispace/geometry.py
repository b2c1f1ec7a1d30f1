"""
Ambient metric structures on R^n x Gr_d(R^n) and its one-point compactification.

Planes are stored as orthonormal ``n x d`` frames. Batched helpers operate on
stacks of frames of shape ``(m, n, d)`` and are written so that the value for a
given pair never depends on how many other pairs share the batch; the indexed
Hausdorff search relies on that to agree bit-for-bit with brute force.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "INFINITY",
    "GrassPlane",
    "GaussPoint",
    "ClosedSetSample",
    "grassmann_distance",
    "grassmann_distances",
    "gauss_distance",
    "pair_distances",
    "gauge",
    "compactified_distance",
    "hausdorff_distance",
    "hausdorff_distance_brute",
    "orthonormalize",
]

ORTHO_TOL = 1e-9


class _Infinity:
    """The point at infinity of a one-point compactification."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def orthonormalize(matrix):
    """Orthonormal basis of the column span of ``matrix`` with a fixed sign convention.

    Each column is flipped so that its largest-magnitude entry is positive; the
    result depends only on the input, never on LAPACK's sign choices between calls.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1)).copy()
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


@dataclass(frozen=True, eq=False)
class GrassPlane:
    """A linear ``d``-plane in R^n given by an orthonormal ``n x d`` frame."""

    frame: np.ndarray

    def __post_init__(self):
        frame = np.array(self.frame, dtype=float)
        if frame.ndim == 1:
            frame = frame[:, None]
        if frame.ndim != 2 or frame.shape[1] > frame.shape[0]:
            raise ValueError(f"frame must be n x d with d <= n, got shape {frame.shape}")
        gram = frame.T @ frame
        if not np.allclose(gram, np.eye(frame.shape[1]), atol=ORTHO_TOL, rtol=0):
            raise ValueError("frame columns are not orthonormal")
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)

    @classmethod
    def span(cls, *vectors):
        """Plane spanned by the given (not necessarily orthonormal) vectors."""
        return cls(orthonormalize(np.column_stack(vectors)))

    @property
    def ambient_dim(self):
        return self.frame.shape[0]

    @property
    def plane_dim(self):
        return self.frame.shape[1]

    def projector(self):
        return self.frame @ self.frame.T

    def rotated(self, rotation):
        return GrassPlane(np.asarray(rotation) @ self.frame)

    def __eq__(self, other):
        if not isinstance(other, GrassPlane):
            return NotImplemented
        return self.frame.shape == other.frame.shape and np.allclose(
            self.projector(), other.projector(), atol=1e-9, rtol=0
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GaussPoint:
    """A point of R^n x Gr_d(R^n): a position together with a plane through it."""

    position: np.ndarray
    plane: GrassPlane

    def __post_init__(self):
        pos = np.array(self.position, dtype=float).reshape(-1)
        pos.setflags(write=False)
        object.__setattr__(self, "position", pos)
        if self.plane.ambient_dim != pos.shape[0]:
            raise ValueError(
                f"plane lives in R^{self.plane.ambient_dim} but position has dimension {pos.shape[0]}"
            )


def gauge(positions):
    """Default vanishing-at-infinity weight g(p) = 1 / (1 + |p|) about the origin."""
    positions = np.asarray(positions, dtype=float)
    return 1.0 / (1.0 + np.sqrt(np.sum(positions * positions, axis=-1)))


def _check_planes(frames_a, frames_b):
    if frames_a.shape[-2:] != frames_b.shape[-2:]:
        raise ValueError(
            f"incompatible planes: Gr_{frames_a.shape[-1]}(R^{frames_a.shape[-2]}) vs "
            f"Gr_{frames_b.shape[-1]}(R^{frames_b.shape[-2]})"
        )


def grassmann_distances(frames_a, frames_b):
    """Largest principal angle between stacks of frames, elementwise.

    Parameters
    ----------
    frames_a, frames_b : array_like, shape (..., n, d)
        Orthonormal frames, broadcast against each other.

    Returns
    -------
    ndarray, shape (...)
        Angles in [0, pi/2].
    """
    a = np.asarray(frames_a, dtype=float)
    b = np.asarray(frames_b, dtype=float)
    _check_planes(a, b)
    d = a.shape[-1]
    if d == 0:
        return np.zeros(np.broadcast_shapes(a.shape[:-2], b.shape[:-2]))
    # explicit products keep every entry independent of batch layout
    m = np.sum(a[..., :, :, None] * b[..., :, None, :], axis=-3)
    mt = np.swapaxes(m, -1, -2)
    # residuals of each frame off the other's span; their singular values are the sines.
    # Averaging both orders makes the result exactly symmetric in floating point.
    res_ab = a - np.sum(b[..., :, None, :] * m[..., None, :, :], axis=-1)
    res_ba = b - np.sum(a[..., :, None, :] * mt[..., None, :, :], axis=-1)
    if d == 1:
        cos_max = np.abs(m[..., 0, 0])
        sin_max = 0.5 * (
            np.sqrt(np.sum(res_ab[..., :, 0] ** 2, axis=-1)) + np.sqrt(np.sum(res_ba[..., :, 0] ** 2, axis=-1))
        )
    else:
        cos_max = 0.5 * (
            np.linalg.svd(m, compute_uv=False)[..., -1] + np.linalg.svd(mt, compute_uv=False)[..., -1]
        )
        sin_max = 0.5 * (
            np.linalg.svd(res_ab, compute_uv=False)[..., 0] + np.linalg.svd(res_ba, compute_uv=False)[..., 0]
        )
    cos_max = np.clip(cos_max, 0.0, 1.0)
    sin_max = np.clip(sin_max, 0.0, 1.0)
    # identical frames give exactly 0 rather than rounding residue
    same = np.all(a == b, axis=(-2, -1))
    return np.where(same, 0.0, np.arctan2(sin_max, cos_max))


def grassmann_distance(plane_a, plane_b):
    """Distance on Gr_d(R^n): the largest principal angle between two planes.

    Equals ``max_{v in S(L)} min_{w in S(L')} angle(v, w)``. The cosine is the
    smallest singular value of ``frame_a.T @ frame_b`` and the sine the largest
    singular value of the residual of ``frame_a`` off ``span(frame_b)``; both are
    clamped to [0, 1] and combined with ``arctan2`` to stay accurate near 0 and pi/2.
    """
    if (plane_a.ambient_dim, plane_a.plane_dim) != (plane_b.ambient_dim, plane_b.plane_dim):
        raise ValueError(
            f"incompatible planes: Gr_{plane_a.plane_dim}(R^{plane_a.ambient_dim}) vs "
            f"Gr_{plane_b.plane_dim}(R^{plane_b.ambient_dim})"
        )
    return float(grassmann_distances(plane_a.frame, plane_b.frame))


def pair_distances(pos_a, frames_a, pos_b, frames_b):
    """Product distance d0 + d1 between aligned stacks of Gauss points."""
    pos_a = np.asarray(pos_a, dtype=float)
    pos_b = np.asarray(pos_b, dtype=float)
    diff = pos_a - pos_b
    d0 = np.sqrt(np.sum(diff * diff, axis=-1))
    return d0 + grassmann_distances(frames_a, frames_b)


def gauss_distance(a, b):
    """Distance ``|x - y| + d1(L, L')`` in R^n x Gr_d(R^n)."""
    if a.position.shape != b.position.shape:
        raise ValueError("incompatible points: ambient dimensions differ")
    return float(
        pair_distances(a.position, a.plane.frame, b.position, b.plane.frame)
    )


def compactified_distance(a, b, gauge_a=None, gauge_b=None):
    """Metric on the one-point compactification of R^n x Gr_d(R^n).

    ``min(d(a, b), g(a) + g(b))`` for finite points, ``g(a)`` against
    ``INFINITY`` and 0 between two infinities. ``g`` defaults to
    ``1 / (1 + |position|)``; pass ``gauge_a``/``gauge_b`` to use another
    1-Lipschitz weight vanishing at infinity.
    """
    if a is INFINITY and b is INFINITY:
        return 0.0
    if a is INFINITY:
        a, b, gauge_a, gauge_b = b, a, gauge_b, gauge_a
    ga = float(gauge(a.position)) if gauge_a is None else float(gauge_a)
    if b is INFINITY:
        return ga
    gb = float(gauge(b.position)) if gauge_b is None else float(gauge_b)
    return min(gauss_distance(a, b), ga + gb)


@dataclass(frozen=True, eq=False)
class ClosedSetSample:
    """Finite sample of a closed subset of the compactified R^n x Gr_d(R^n).

    Parameters
    ----------
    positions : ndarray, shape (m, n)
    frames : ndarray, shape (m, n, d)
    has_infinity : bool
        Whether the point at infinity belongs to the set (the image of A under
        A -> A u {inf}).
    gauges : ndarray, shape (m,), optional
        Per-point values of the vanishing weight g. Defaults to ``gauge(positions)``.
    """

    positions: np.ndarray
    frames: np.ndarray
    has_infinity: bool = True
    gauges: np.ndarray = field(default=None)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        frames = np.array(self.frames, dtype=float)
        if pos.ndim != 2:
            raise ValueError("positions must be a 2-D array")
        if frames.ndim != 3 or frames.shape[:2] != pos.shape:
            raise ValueError(
                f"frames must have shape (m, n, d) matching positions {pos.shape}, got {frames.shape}"
            )
        if self.gauges is None:
            g = gauge(pos)
        else:
            g = np.array(self.gauges, dtype=float).reshape(-1)
            if g.shape[0] != pos.shape[0]:
                raise ValueError("one gauge value per point is required")
        for arr in (pos, frames, g):
            arr.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "gauges", g)
        object.__setattr__(self, "has_infinity", bool(self.has_infinity))

    @classmethod
    def from_points(cls, points, ambient_dim=None, plane_dim=None):
        """Build a sample from a list of ``GaussPoint`` and ``INFINITY`` entries."""
        finite = [p for p in points if p is not INFINITY]
        has_inf = len(finite) != len(points)
        if finite:
            pos = np.stack([p.position for p in finite])
            frames = np.stack([p.plane.frame for p in finite])
        else:
            if ambient_dim is None or plane_dim is None:
                raise ValueError("dimensions are required for a sample without finite points")
            pos = np.zeros((0, ambient_dim))
            frames = np.zeros((0, ambient_dim, plane_dim))
        return cls(pos, frames, has_inf)

    @property
    def ambient_dim(self):
        return self.positions.shape[1]

    @property
    def plane_dim(self):
        return self.frames.shape[2]

    def __len__(self):
        return self.positions.shape[0] + int(self.has_infinity)

    def is_empty(self):
        return len(self) == 0

    def points(self):
        pts = [
            GaussPoint(x, GrassPlane(f)) for x, f in zip(self.positions, self.frames)
        ]
        if self.has_infinity:
            pts.append(INFINITY)
        return pts


def _validate_pair(A, B):
    for s in (A, B):
        if s.is_empty():
            raise ValueError("empty closed-set sample")
    if (A.ambient_dim, A.plane_dim) != (B.ambient_dim, B.plane_dim):
        raise ValueError(
            f"incompatible samples: ({A.ambient_dim}, {A.plane_dim}) vs ({B.ambient_dim}, {B.plane_dim})"
        )


def _tail(src, dst):
    """Per-point distance from each finite point of ``src`` to the non-finite part of ``dst``.

    Covers the point at infinity of ``dst`` and the ``g(a) + g(b)`` branch of the
    compactified metric, which together never beat ``g(a)`` when ``dst`` contains
    infinity.
    """
    if dst.has_infinity:
        return src.gauges.copy()
    if dst.positions.shape[0] == 0:
        return np.full(src.positions.shape[0], np.inf)
    return src.gauges + dst.gauges.min()


def _infinity_term(src, dst):
    """Directed contribution of ``src``'s point at infinity."""
    if not src.has_infinity or dst.has_infinity:
        return 0.0
    return float(dst.gauges.min())


def _directed_brute(src, dst):
    best = _tail(src, dst)
    m = dst.positions.shape[0]
    for i in range(src.positions.shape[0]):
        if m:
            row = pair_distances(src.positions[i], src.frames[i], dst.positions, dst.frames)
            best[i] = min(best[i], row.min())
    out = _infinity_term(src, dst)
    if best.size:
        out = max(out, float(best.max()))
    return out


def hausdorff_distance_brute(A, B):
    """O(|A| |B|) Hausdorff distance under the compactified metric (reference oracle)."""
    _validate_pair(A, B)
    return max(_directed_brute(A, B), _directed_brute(B, A))


_SLACK = 1e-9


def _directed_chunk(src, dst, tree, nearest, idx):
    """Directed Hausdorff over the ``src`` rows in ``idx`` with early break."""
    tail = _tail(src, dst)
    current = -np.inf
    for i in idx:
        bound = tail[i]
        if tree is not None:
            j = nearest[i]
            dj = pair_distances(src.positions[i], src.frames[i], dst.positions[j], dst.frames[j])
            bound = min(bound, float(dj))
        if bound <= current:
            # this point cannot raise the running maximum
            continue
        if tree is not None:
            # d >= d0, so every candidate below the bound lies in this ball
            cand = tree.query_ball_point(src.positions[i], bound * (1 + _SLACK) + _SLACK)
            if cand:
                cand = np.asarray(cand)
                dists = pair_distances(
                    src.positions[i], src.frames[i], dst.positions[cand], dst.frames[cand]
                )
                bound = min(bound, float(dists.min()))
        current = max(current, bound)
    return current


def _directed_indexed(src, dst, workers=1):
    m_src = src.positions.shape[0]
    out = _infinity_term(src, dst)
    if m_src == 0:
        return out
    if dst.positions.shape[0]:
        tree = cKDTree(dst.positions)
        _, nearest = tree.query(src.positions, k=1)
        nearest = np.atleast_1d(nearest)
    else:
        tree, nearest = None, None
    chunks = [c for c in np.array_split(np.arange(m_src), max(1, int(workers))) if c.size]
    if len(chunks) == 1:
        parts = [_directed_chunk(src, dst, tree, nearest, chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: _directed_chunk(src, dst, tree, nearest, c), chunks))
    return max(out, max(parts))


def hausdorff_distance(A, B, workers=1):
    """Hausdorff distance between two closed-set samples under the compactified metric.

    A kd-tree over positions bounds each nearest-neighbour search (``d >= d0``) and
    points that cannot raise the running maximum are skipped. Only exact max/min
    reductions are used, so the result equals ``hausdorff_distance_brute`` exactly
    for any ``workers``.

    Raises
    ------
    ValueError
        If either sample is empty (no finite points and no infinity), or the
        dimensions differ.
    """
    _validate_pair(A, B)
    return max(_directed_indexed(A, B, workers), _directed_indexed(B, A, workers))
