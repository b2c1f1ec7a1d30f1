"""
Discretized proper submanifolds of R^n.

A ``DiscretizedSubmanifold`` is a weighted, tangent-framed point sample standing
in for a smooth proper submanifold W. Generator-backed samples keep their
``Parametrization`` so that normal sections can be pushed through it exactly
(positions) or by central finite differences in parameter space (tangents and
volume elements).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.spatial import cKDTree

from .geometry import ORTHO_TOL, orthonormalize
from .regions import Ball, WholeSpace, region_from_dict

__all__ = [
    "DiscretizedSubmanifold",
    "LabeledSubmanifold",
    "Parametrization",
    "circle",
    "sphere",
    "affine_plane",
    "graph_of_function",
    "torus",
    "empty",
    "generate",
    "perturb_normal",
    "parallel_copies",
    "restrict_to_radius",
    "exhaustion",
    "rotate",
    "ball_volume",
    "sphere_area",
]

_FD_STEP = 1e-6


def ball_volume(d, radius=1.0):
    """Volume of the Euclidean d-ball."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius**d


def sphere_area(n, radius=1.0):
    """(n-1)-volume of the round sphere S^{n-1}(radius) in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2) * radius ** (n - 1)


def _volume_element(jac):
    """sqrt(det(J^T J)) for a stack of n x d Jacobians."""
    if jac.shape[-1] == 0:
        return np.ones(jac.shape[:-2])
    gram = np.einsum("...ki,...kj->...ij", jac, jac)
    return np.sqrt(np.maximum(np.linalg.det(gram), 0.0))


def _complement(frames):
    """First column of the orthogonal complement of each frame, with a sign convention."""
    m, n, d = frames.shape
    out = np.empty((m, n))
    eye = np.eye(n)
    for i in range(m):
        q = orthonormalize(np.column_stack([frames[i], eye]))
        out[i] = q[:, d]
    return out


def _oriented_normals(positions, frames):
    """Unit normals of a sampled hypersurface, sign-coherent along nearest-neighbour chains.

    Each neighbour-graph component is walked breadth first from its lowest index;
    a normal is flipped when it disagrees with its parent's. The root points away
    from the component centroid (outward on closed curves and surfaces).
    """
    normals = _complement(frames)
    m = len(normals)
    if m < 2:
        return normals
    k = min(m, 2 * frames.shape[2] + 3)
    _, idx = cKDTree(positions).query(positions, k=k)
    rows = np.repeat(np.arange(m), k)
    graph = coo_matrix((np.ones(m * k), (rows, idx.ravel())), shape=(m, m)).tocsr()
    _, labels = connected_components(graph, directed=False)
    for lab in np.unique(labels):
        members = np.flatnonzero(labels == lab)
        root = members[0]
        if np.dot(normals[root], positions[root] - positions[members].mean(axis=0)) < 0:
            normals[root] = -normals[root]
        order, parent = breadth_first_order(graph, root, directed=False)
        for i in order[1:]:
            if np.dot(normals[i], normals[parent[i]]) < 0:
                normals[i] = -normals[i]
    return normals


def _ball_params(d, extent, count):
    """Quadrature nodes and cell measures covering the closed d-ball of radius ``extent``."""
    if d == 0:
        return np.zeros((1, 0)), np.ones(1), 0.0
    if d == 1:
        step = 2.0 * extent / count
        t = -extent + (np.arange(count) + 0.5) * step
        return t[:, None], np.full(count, step), step
    if d == 2:
        rings = max(1, int(round(math.sqrt(count / math.pi))))
        pts, cells, h = [], [], extent / rings
        for i in range(rings):
            n_i = max(1, int(round(count * (2 * i + 1) / rings**2)))
            rad = (i + 0.5) * extent / rings
            ang = 2 * math.pi * (np.arange(n_i) + 0.5 * (i % 2)) / n_i
            pts.append(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]))
            area = math.pi * extent**2 * (2 * i + 1) / rings**2
            cells.append(np.full(n_i, area / n_i))
            h = max(h, 2 * math.pi * rad / n_i)
        return np.vstack(pts), np.concatenate(cells), h
    per_axis = max(2, int(round(2 * (count / ball_volume(d)) ** (1 / d))))
    step = 2.0 * extent / per_axis
    axis = -extent + (np.arange(per_axis) + 0.5) * step
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    grid = grid[np.sum(grid * grid, axis=1) <= extent**2]
    cells = np.full(grid.shape[0], ball_volume(d, extent) / grid.shape[0])
    return grid, cells, step * math.sqrt(d)


class Parametrization:
    """Smooth map from parameter space onto a submanifold, sampled at fixed nodes.

    Subclasses set ``ambient_dim``, ``dim``, ``params``, ``cells``, ``resolution``,
    ``injectivity_radius`` and ``descriptor`` and implement ``embed`` and
    ``normal``. ``jacobian`` defaults to central finite differences.
    """

    ambient_dim: int
    dim: int
    params: np.ndarray
    cells: np.ndarray
    resolution: float
    injectivity_radius: float = math.inf
    descriptor: dict

    def embed(self, u):
        raise NotImplementedError

    def normal(self, u):
        raise NotImplementedError

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        m, d = u.shape
        jac = np.empty((m, self.ambient_dim, d))
        for k in range(d):
            step = _FD_STEP * max(1.0, float(np.max(np.abs(u[:, k]), initial=0.0)))
            du = np.zeros(d)
            du[k] = step
            jac[:, :, k] = (self.embed(u + du) - self.embed(u - du)) / (2 * step)
        return jac

    def frames(self, u):
        return orthonormalize(self.jacobian(u))

    def weights(self, u):
        return _volume_element(self.jacobian(u)) * self.cells

    def sample(self, domain=None):
        u = self.params
        return DiscretizedSubmanifold(
            positions=self.embed(u),
            frames=self.frames(u),
            weights=self.weights(u),
            resolution=self.resolution,
            domain=domain or WholeSpace(),
            source=self,
        )


class _Circle(Parametrization):
    def __init__(self, radius, center, count):
        if radius <= 0:
            raise ValueError("circle radius must be positive")
        if count <= 0:
            raise ValueError("sample count must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float).reshape(-1)
        if self.center.shape[0] < 2:
            raise ValueError("circle center needs at least two coordinates")
        self.ambient_dim, self.dim = self.center.shape[0], 1
        self.params = (2 * math.pi * np.arange(count) / count)[:, None]
        self.cells = np.full(count, 2 * math.pi / count)
        self.resolution = self.radius * 2 * math.pi / count
        self.injectivity_radius = self.radius
        self.descriptor = {
            "kind": "circle",
            "radius": self.radius,
            "center": self.center.tolist(),
            "count": int(count),
        }

    def _plane(self, vec2):
        out = np.zeros((vec2.shape[0], self.ambient_dim))
        out[:, :2] = vec2
        return out

    def embed(self, u):
        t = u[:, 0]
        return self.center + self.radius * self._plane(np.column_stack([np.cos(t), np.sin(t)]))

    def jacobian(self, u):
        t = u[:, 0]
        return self.radius * self._plane(np.column_stack([-np.sin(t), np.cos(t)]))[:, :, None]

    def normal(self, u):
        t = u[:, 0]
        return self._plane(np.column_stack([np.cos(t), np.sin(t)]))


def _fibonacci_directions(count):
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    phi = math.pi * (1 + math.sqrt(5)) * i
    rho = np.sqrt(1 - z * z)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _to_hyperspherical(x):
    n = x.shape[1]
    angles = np.empty((x.shape[0], n - 1))
    for k in range(n - 2):
        tail = np.sqrt(np.sum(x[:, k + 1 :] ** 2, axis=1))
        angles[:, k] = np.arctan2(tail, x[:, k])
    angles[:, n - 2] = np.arctan2(x[:, n - 1], x[:, n - 2])
    return angles


def _from_hyperspherical(angles):
    m, k = angles.shape
    out = np.empty((m, k + 1))
    prod = np.ones(m)
    for j in range(k):
        out[:, j] = prod * np.cos(angles[:, j])
        prod = prod * np.sin(angles[:, j])
    out[:, k] = prod
    return out


class _Sphere(Parametrization):
    def __init__(self, n, radius, count, seed=0):
        if n < 2:
            raise ValueError("sphere needs ambient dimension >= 2")
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        if count <= 0:
            raise ValueError("sample count must be positive")
        self.ambient_dim, self.dim, self.radius = int(n), int(n) - 1, float(radius)
        if n == 2:
            t = 2 * math.pi * np.arange(count) / count
            dirs = np.column_stack([np.cos(t), np.sin(t)])
        elif n == 3:
            dirs = _fibonacci_directions(count)
        else:
            g = np.random.default_rng(seed).standard_normal((count, n))
            dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
        self._dirs = dirs
        self.params = _to_hyperspherical(dirs)
        self.cells = np.full(count, sphere_area(n, self.radius) / count)
        self.resolution = self.radius * (sphere_area(n) / count) ** (1 / self.dim) * 2
        self.injectivity_radius = self.radius
        self.descriptor = {
            "kind": "sphere",
            "n": self.ambient_dim,
            "radius": self.radius,
            "count": int(count),
            "seed": int(seed),
        }

    def embed(self, u):
        return self.radius * _from_hyperspherical(u)

    def normal(self, u):
        return _from_hyperspherical(u)

    def frames(self, u):
        x = _from_hyperspherical(u)
        out = np.empty((x.shape[0], self.ambient_dim, self.dim))
        for i, v in enumerate(x):
            q, _ = np.linalg.qr(v[:, None], mode="complete")
            out[i] = orthonormalize(q[:, 1:])
        return out

    def weights(self, u):
        # equal-area nodes; the parametrization's Jacobian is only used for perturbations
        return self.cells.copy()


class _AffinePlane(Parametrization):
    def __init__(self, n, d, basepoint, frame, extent, count):
        if not 1 <= d < n:
            raise ValueError(f"affine plane needs 1 <= d < n, got d={d}, n={n}")
        if extent <= 0 or count <= 0:
            raise ValueError("extent and count must be positive")
        self.ambient_dim, self.dim = int(n), int(d)
        self.basepoint = np.zeros(n) if basepoint is None else np.asarray(basepoint, float).reshape(n)
        frame = np.eye(n)[:, :d] if frame is None else np.asarray(frame, float).reshape(n, d)
        if not np.allclose(frame.T @ frame, np.eye(d), atol=ORTHO_TOL):
            raise ValueError("affine plane frame must have orthonormal columns")
        self.frame = frame
        self.extent = float(extent)
        self.params, self.cells, self.resolution = _ball_params(d, self.extent, int(count))
        self._normal = _complement(frame[None])[0]
        self.descriptor = {
            "kind": "affine_plane",
            "n": self.ambient_dim,
            "d": self.dim,
            "basepoint": self.basepoint.tolist(),
            "frame": frame.tolist(),
            "extent": self.extent,
            "count": int(count),
        }

    def embed(self, u):
        return self.basepoint + u @ self.frame.T

    def jacobian(self, u):
        return np.broadcast_to(self.frame, (u.shape[0],) + self.frame.shape).copy()

    def normal(self, u):
        return np.broadcast_to(self._normal, (u.shape[0], self.ambient_dim)).copy()


class _Graph(Parametrization):
    """Graph of u -> offset + linear u + 1/2 quadratic[u, u] over the d-ball of radius extent."""

    def __init__(self, n, d, offset, linear, quadratic, extent, count):
        if not 1 <= d < n:
            raise ValueError(f"graph needs 1 <= d < n, got d={d}, n={n}")
        if extent <= 0 or count <= 0:
            raise ValueError("extent and count must be positive")
        c = n - d
        self.ambient_dim, self.dim = int(n), int(d)
        self.offset = np.zeros(c) if offset is None else np.asarray(offset, float).reshape(c)
        self.linear = np.zeros((c, d)) if linear is None else np.asarray(linear, float).reshape(c, d)
        self.quadratic = (
            np.zeros((c, d, d)) if quadratic is None else np.asarray(quadratic, float).reshape(c, d, d)
        )
        self.quadratic = 0.5 * (self.quadratic + np.swapaxes(self.quadratic, 1, 2))
        self.extent = float(extent)
        self.params, self.cells, h = _ball_params(d, self.extent, int(count))
        slope = np.linalg.norm(self.linear, 2) + np.abs(self.quadratic).sum(axis=0).max() * self.extent
        self.resolution = h * math.sqrt(1 + slope**2)
        curv = np.abs(self.quadratic).sum(axis=0).max() if self.quadratic.size else 0.0
        self.injectivity_radius = math.inf if curv == 0 else 1.0 / curv
        self.descriptor = {
            "kind": "graph",
            "n": self.ambient_dim,
            "d": self.dim,
            "offset": self.offset.tolist(),
            "linear": self.linear.tolist(),
            "quadratic": self.quadratic.tolist(),
            "extent": self.extent,
            "count": int(count),
        }

    def _height(self, u):
        quad = 0.5 * np.einsum("cij,mi,mj->mc", self.quadratic, u, u)
        return self.offset + u @ self.linear.T + quad

    def embed(self, u):
        return np.hstack([u, self._height(u)])

    def jacobian(self, u):
        grad = self.linear[None] + np.einsum("cij,mj->mci", self.quadratic, u)
        top = np.broadcast_to(np.eye(self.dim), (u.shape[0], self.dim, self.dim))
        return np.concatenate([top, grad], axis=1)

    def normal(self, u):
        return _complement(self.frames(u))


class _Torus(Parametrization):
    def __init__(self, radii, counts):
        big, small = (float(r) for r in radii)
        nu, nv = (int(c) for c in counts)
        if not 0 < small < big:
            raise ValueError("torus radii must satisfy 0 < minor < major")
        if nu <= 0 or nv <= 0:
            raise ValueError("sample counts must be positive")
        self.ambient_dim, self.dim = 3, 2
        self.big, self.small = big, small
        a = 2 * math.pi * np.arange(nu) / nu
        b = 2 * math.pi * np.arange(nv) / nv
        aa, bb = np.meshgrid(a, b, indexing="ij")
        self.params = np.column_stack([aa.ravel(), bb.ravel()])
        self.cells = np.full(nu * nv, (2 * math.pi) ** 2 / (nu * nv))
        self.resolution = max((big + small) * 2 * math.pi / nu, small * 2 * math.pi / nv)
        self.injectivity_radius = small
        self.descriptor = {"kind": "torus", "radii": [big, small], "counts": [nu, nv]}

    def embed(self, u):
        a, b = u[:, 0], u[:, 1]
        ring = self.big + self.small * np.cos(b)
        return np.column_stack([ring * np.cos(a), ring * np.sin(a), self.small * np.sin(b)])

    def jacobian(self, u):
        a, b = u[:, 0], u[:, 1]
        ring = self.big + self.small * np.cos(b)
        da = np.column_stack([-ring * np.sin(a), ring * np.cos(a), np.zeros_like(a)])
        db = self.small * np.column_stack([-np.sin(b) * np.cos(a), -np.sin(b) * np.sin(a), np.cos(b)])
        return np.stack([da, db], axis=-1)

    def normal(self, u):
        a, b = u[:, 0], u[:, 1]
        return np.column_stack([np.cos(b) * np.cos(a), np.cos(b) * np.sin(a), np.sin(b)])


_MODES = ("constant", "smooth-bump", "tilt")


class _Perturbed(Parametrization):
    """Image of the normal section u -> delta * b(u) * N(u) of a base parametrization."""

    def __init__(self, base, delta, mode="constant", bump_center=None, bump_width=1.0):
        if mode not in _MODES:
            raise ValueError(f"unknown perturbation mode {mode!r}; expected one of {_MODES}")
        self.base, self.delta, self.mode = base, float(delta), mode
        self.ambient_dim, self.dim = base.ambient_dim, base.dim
        self.params, self.cells = base.params, base.cells
        if mode == "smooth-bump":
            if bump_center is None:
                bump_center = base.embed(base.params[:1])[0]
            self.bump_center = np.asarray(bump_center, float).reshape(self.ambient_dim)
            if bump_width <= 0:
                raise ValueError("bump width must be positive")
            self.bump_width = float(bump_width)
        amp = abs(self.delta) * self._profile_sup()
        if amp >= base.injectivity_radius:
            raise ValueError(
                f"normal displacement {amp:g} exceeds tube radius {base.injectivity_radius:g}"
            )
        self.injectivity_radius = base.injectivity_radius - amp
        self.descriptor = {"kind": "perturb", "base": base.descriptor, "delta": self.delta, "mode": mode}
        if mode == "smooth-bump":
            self.descriptor.update(bump_center=self.bump_center.tolist(), bump_width=self.bump_width)
        jac_b = base.jacobian(self.params)
        jac_p = self.jacobian(self.params)
        stretch = np.linalg.norm(jac_p, ord=2, axis=(1, 2)) / np.maximum(
            np.linalg.svd(jac_b, compute_uv=False)[:, -1], 1e-300
        )
        self.resolution = base.resolution * max(1.0, float(stretch.max(initial=1.0)))

    def _profile_sup(self):
        if self.mode == "tilt":
            return float(np.max(np.abs(self.params[:, 0]), initial=0.0))
        return 1.0

    def _profile(self, u):
        if self.mode == "constant":
            return np.ones(u.shape[0])
        if self.mode == "tilt":
            return u[:, 0]
        dist = np.linalg.norm(self.base.embed(u) - self.bump_center, axis=1)
        return 0.5 * (1 + np.cos(math.pi * np.minimum(dist / self.bump_width, 1.0)))

    def embed(self, u):
        return self.base.embed(u) + self.delta * self._profile(u)[:, None] * self.base.normal(u)

    def frames(self, u):
        if self.mode == "constant" and self.ambient_dim - self.dim == 1:
            # parallel hypersurfaces share tangent planes at corresponding points
            return self.base.frames(u)
        return orthonormalize(self.jacobian(u))

    def weights(self, u):
        ratio = _volume_element(self.jacobian(u)) / _volume_element(self.base.jacobian(u))
        return self.base.weights(u) * ratio

    def normal(self, u):
        nb = self.base.normal(u)
        fr = self.frames(u)
        proj = nb - np.einsum("mij,mj->mi", fr, np.einsum("mji,mj->mi", fr, nb))
        return proj / np.linalg.norm(proj, axis=1, keepdims=True)


class _Union(Parametrization):
    """Disjoint union of parametrizations sharing (n, d); parameters are stacked."""

    def __init__(self, parts, descriptor):
        self.parts = list(parts)
        self.ambient_dim, self.dim = self.parts[0].ambient_dim, self.parts[0].dim
        self.params = np.vstack([p.params for p in self.parts])
        self.cells = np.concatenate([p.cells for p in self.parts])
        self.resolution = max(p.resolution for p in self.parts)
        self.injectivity_radius = min(p.injectivity_radius for p in self.parts)
        self.descriptor = descriptor
        self._bounds = np.cumsum([0] + [p.params.shape[0] for p in self.parts])

    def _each(self, name, u):
        if u.shape[0] != self.params.shape[0]:
            raise ValueError("union parametrizations are evaluated at their own nodes only")
        return np.concatenate(
            [getattr(p, name)(u[a:b]) for p, a, b in zip(self.parts, self._bounds[:-1], self._bounds[1:])]
        )

    def embed(self, u):
        return self._each("embed", u)

    def jacobian(self, u):
        return self._each("jacobian", u)

    def frames(self, u):
        return self._each("frames", u)

    def weights(self, u):
        return self._each("weights", u)

    def normal(self, u):
        return self._each("normal", u)


@dataclass(frozen=True, eq=False)
class DiscretizedSubmanifold:
    """Weighted, tangent-framed sample of a proper d-submanifold W of a domain U in R^n.

    Attributes
    ----------
    positions : ndarray, shape (m, n)
    frames : ndarray, shape (m, n, d)
        Orthonormal tangent frames.
    weights : ndarray, shape (m,)
        Local d-volume element carried by each sample.
    resolution : float
        Largest geodesic spacing between neighbouring samples (``h``).
    domain : WholeSpace, Ball or Box
        The open region U that W lives in.
    source : Parametrization or None
        Generator that produced the samples, if any.
    """

    positions: np.ndarray
    frames: np.ndarray
    weights: np.ndarray
    resolution: float = 1.0
    domain: object = field(default_factory=WholeSpace)
    source: Parametrization | None = None

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        frames = np.array(self.frames, dtype=float)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if pos.ndim != 2 or frames.ndim != 3 or frames.shape[:2] != pos.shape:
            raise ValueError(f"inconsistent shapes: positions {pos.shape}, frames {frames.shape}")
        n, d = frames.shape[1], frames.shape[2]
        if not 0 <= d < n:
            raise ValueError(f"need 0 <= d < n, got d={d}, n={n}")
        if w.shape[0] != pos.shape[0]:
            raise ValueError("one weight per sample is required")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if not (self.resolution > 0 and np.isfinite(self.resolution)):
            raise ValueError("resolution must be positive")
        if self.source is not None and self.source.params.shape[0] != pos.shape[0]:
            raise ValueError("source parametrization does not match the sample count")
        for arr in (pos, frames, w):
            arr.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def ambient_dim(self):
        return self.frames.shape[1]

    @property
    def intrinsic_dim(self):
        return self.frames.shape[2]

    def __len__(self):
        return self.positions.shape[0]

    def total_weight(self):
        return float(self.weights.sum())

    def subset(self, mask):
        """Samples selected by a boolean mask or index array (drops the parametrization)."""
        return DiscretizedSubmanifold(
            self.positions[mask], self.frames[mask], self.weights[mask], self.resolution, self.domain
        )

    def normals(self):
        """A unit normal per sample: the generator's field, else a frame complement (sign-coherent in codimension 1)."""
        if self.source is not None:
            return self.source.normal(self.source.params)
        if len(self) == 0:
            return np.zeros((0, self.ambient_dim))
        if self.ambient_dim - self.intrinsic_dim == 1:
            return _oriented_normals(self.positions, self.frames)
        return _complement(self.frames)


@dataclass(frozen=True, eq=False)
class LabeledSubmanifold:
    """A discretized submanifold together with one real label per sample."""

    base: DiscretizedSubmanifold
    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, dtype=float).reshape(-1)
        if labels.shape[0] != len(self.base):
            raise ValueError(f"label count {labels.shape[0]} does not match sample count {len(self.base)}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)


def circle(radius=1.0, center=(0.0, 0.0), count=512):
    """Round circle in the (x1, x2)-plane, ``count`` equally spaced samples starting at angle 0."""
    return _Circle(radius, center, count).sample()


def sphere(n=3, radius=1.0, count=1024, seed=0):
    """Round (n-1)-sphere about the origin with equal-area weights.

    Nodes are equally spaced for n = 2, a Fibonacci lattice for n = 3 and seeded
    Gaussian directions for n >= 4.
    """
    return _Sphere(n, radius, count, seed).sample()


def affine_plane(n=2, d=1, basepoint=None, frame=None, extent=1.0, count=256):
    """Affine d-plane through ``basepoint`` spanned by ``frame``, restricted to the in-plane ball of radius ``extent``."""
    return _AffinePlane(n, d, basepoint, frame, extent, count).sample()


def graph_of_function(n=2, d=1, offset=None, linear=None, quadratic=None, extent=1.0, count=256):
    """Graph of ``u -> offset + linear @ u + 1/2 quadratic[u, u]`` over the d-ball of radius ``extent``."""
    return _Graph(n, d, offset, linear, quadratic, extent, count).sample()


def torus(radii=(2.0, 0.5), counts=(64, 32)):
    """Torus of revolution in R^3 about the x3-axis."""
    return _Torus(radii, counts).sample()


def empty(n=2, d=1):
    """The empty submanifold of R^n of dimension d."""
    if not 0 <= d < n:
        raise ValueError(f"need 0 <= d < n, got d={d}, n={n}")
    return DiscretizedSubmanifold(np.zeros((0, n)), np.zeros((0, n, d)), np.zeros(0))


def _build(desc):
    kind = desc.get("kind")
    if kind == "circle":
        return _Circle(desc["radius"], desc.get("center", (0.0, 0.0)), desc["count"])
    if kind == "sphere":
        return _Sphere(desc.get("n", 3), desc["radius"], desc["count"], desc.get("seed", 0))
    if kind == "affine_plane":
        return _AffinePlane(
            desc["n"], desc["d"], desc.get("basepoint"), desc.get("frame"), desc["extent"], desc["count"]
        )
    if kind == "graph":
        return _Graph(
            desc["n"], desc["d"], desc.get("offset"), desc.get("linear"), desc.get("quadratic"),
            desc["extent"], desc["count"],
        )
    if kind == "torus":
        return _Torus(desc["radii"], desc["counts"])
    if kind == "perturb":
        return _Perturbed(
            _build(desc["base"]), desc["delta"], desc.get("mode", "constant"),
            desc.get("bump_center"), desc.get("bump_width", 1.0),
        )
    if kind == "union":
        return _Union([_build(p) for p in desc["parts"]], desc)
    raise ValueError(f"unknown generator kind {kind!r}")


def generate(descriptor):
    """Build a manifold from a generator descriptor such as ``{"kind": "circle", "radius": 1, "count": 512}``.

    ``{"kind": "empty", "n": 2, "d": 1}`` yields the empty manifold.
    """
    if descriptor.get("kind") == "empty":
        return empty(descriptor.get("n", 2), descriptor.get("d", 1))
    domain = region_from_dict(descriptor.get("domain"))
    desc = {k: v for k, v in descriptor.items() if k != "domain"}
    return _build(desc).sample(domain)


def _shift_without_source(W, delta):
    if W.ambient_dim - W.intrinsic_dim != 1:
        raise ValueError("perturbing a manifold without a generator requires codimension 1")
    return DiscretizedSubmanifold(
        W.positions + delta * W.normals(), W.frames, W.weights, W.resolution, W.domain
    )


def perturb_normal(W, delta, mode="constant", bump_center=None, bump_width=1.0):
    """Image of W under the normal section ``x -> delta * b(x) * N(x)``.

    Parameters
    ----------
    W : DiscretizedSubmanifold
    delta : float
        Amplitude of the section.
    mode : {"constant", "smooth-bump", "tilt"}
        Profile ``b``: 1; a raised-cosine bump of radius ``bump_width`` around
        ``bump_center`` (default: the first sample); or the first parameter
        coordinate (a linear section, e.g. ``y = delta * x`` over the x-axis).

    Raises
    ------
    ValueError
        If the displacement reaches the injectivity radius ("exceeds tube").

    Notes
    -----
    Without a generator only constant shifts of hypersurfaces are supported;
    tangents and weights are then kept unchanged.
    """
    if delta < 0 and mode != "tilt":
        raise ValueError("delta must be nonnegative")
    if W.source is None:
        if len(W) == 0:
            return W
        if mode != "constant":
            raise ValueError(f"mode {mode!r} needs a generator-backed manifold")
        return _shift_without_source(W, delta)
    if delta == 0:
        return W
    param = _Perturbed(W.source, delta, mode, bump_center, bump_width)
    return param.sample(W.domain)


def parallel_copies(W, delta):
    """Disjoint union of the constant normal shifts by +delta and -delta."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if W.source is None:
        if len(W) == 0:
            return W
        plus, minus = _shift_without_source(W, delta), _shift_without_source(W, -delta)
        return DiscretizedSubmanifold(
            np.vstack([plus.positions, minus.positions]),
            np.concatenate([plus.frames, minus.frames]),
            np.concatenate([plus.weights, minus.weights]),
            W.resolution,
            W.domain,
        )
    parts = [_Perturbed(W.source, delta), _Perturbed(W.source, -delta)]
    desc = {"kind": "union", "parts": [p.descriptor for p in parts], "copies_of": W.source.descriptor}
    return _Union(parts, desc).sample(W.domain)


def exhaustion(positions, domain=None):
    """Exhaustion value of each point: ``|x|``, or ``max(|x|, 1/dist(x, R^n - U))`` for a proper domain U."""
    positions = np.asarray(positions, dtype=float)
    norms = np.sqrt(np.sum(positions * positions, axis=-1))
    if domain is None or isinstance(domain, WholeSpace):
        return norms
    dist = domain.distance_to_complement(positions)
    with np.errstate(divide="ignore"):
        inv = np.where(dist > 0, 1.0 / np.where(dist > 0, dist, 1.0), np.inf)
    return np.maximum(norms, inv)


def restrict_to_radius(W, r, mode="origin-ball"):
    """The truncation W_r and its volume.

    Parameters
    ----------
    mode : {"origin-ball", "domain-aware"}
        ``origin-ball`` keeps samples with ``|x| <= r``; ``domain-aware`` keeps
        those with ``max(|x|, 1/dist(x, R^n - U)) <= r``.

    Returns
    -------
    (DiscretizedSubmanifold, float)
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if mode == "origin-ball":
        values = exhaustion(W.positions)
    elif mode == "domain-aware":
        if isinstance(W.domain, WholeSpace):
            raise ValueError("domain-aware truncation needs a proper domain U")
        values = exhaustion(W.positions, W.domain)
    else:
        raise ValueError(f"unknown truncation mode {mode!r}")
    mask = values <= r
    sub = W.subset(mask)
    return sub, float(W.weights[mask].sum())


def rotate(W, rotation):
    """Apply an orthogonal matrix to positions and frames (drops the parametrization)."""
    R = np.asarray(rotation, dtype=float)
    domain = W.domain
    if not isinstance(domain, WholeSpace):
        if isinstance(domain, Ball):
            domain = Ball(R @ np.asarray(domain.center), domain.radius)
        else:
            raise ValueError("only ball domains can be rotated")
    return DiscretizedSubmanifold(
        W.positions @ R.T,
        np.einsum("ij,mjk->mik", R, W.frames),
        W.weights,
        W.resolution,
        domain,
    )


def with_domain(W, domain):
    return replace(W, domain=domain)
