"""Shared fixtures and brute-force oracles for the test suite."""

import math

import numpy as np

from psispace import manifolds as M
from psispace.geometry import orthonormalize


def random_frame(rng, n, d):
    return orthonormalize(rng.normal(size=(n, d)))


def rotation_2d(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_rotation(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def brute_grassmann(fa, fb, rng, directions=10_000):
    """max over sampled unit v in span(fa) of the angle between v and span(fb)."""
    d = fa.shape[1]
    u = rng.normal(size=(directions, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = u @ fa.T
    proj = (v @ fb) @ fb.T
    cos = np.clip(np.linalg.norm(proj, axis=1), 0.0, 1.0)
    return float(np.arccos(cos).max())


def brute_compactified_hausdorff(pa, fa, ga, pb, fb, gb):
    """Hausdorff distance of two finite Gauss samples, both with infinity adjoined.

    Pairwise matrix of min(|x - y| + d1, g(x) + g(y)) via principal-angle SVDs,
    plus the infinity terms; no spatial index and no early exit.
    """
    def d1(x, y):
        if x.shape[1] == 0:
            return 0.0
        s = np.linalg.svd(x.T @ y, compute_uv=False)
        return float(np.arccos(np.clip(s.min(), 0.0, 1.0)))

    D = np.empty((len(pa), len(pb)))
    for i in range(len(pa)):
        for j in range(len(pb)):
            D[i, j] = min(np.linalg.norm(pa[i] - pb[j]) + d1(fa[i], fb[j]), ga[i] + gb[j])
    # a finite point may be closest to infinity, whose distance to it is its gauge
    to_b = np.minimum(D.min(axis=1, initial=np.inf), ga) if len(pa) else np.zeros(0)
    to_a = np.minimum(D.min(axis=0, initial=np.inf), gb) if len(pb) else np.zeros(0)
    inf_to_b = min(gb.min(initial=np.inf), 0.0)
    inf_to_a = min(ga.min(initial=np.inf), 0.0)
    return float(max(to_b.max(initial=0.0), to_a.max(initial=0.0), inf_to_a, inf_to_b))


def polyline_points(vertices, spacing):
    """Dense samples along a polyline."""
    vertices = np.asarray(vertices, dtype=float)
    pieces = [vertices[:1]]
    for a, b in zip(vertices[:-1], vertices[1:]):
        k = max(1, int(math.ceil(np.linalg.norm(b - a) / spacing)))
        t = (np.arange(1, k + 1) / k)[:, None]
        pieces.append(a + t * (b - a))
    return np.vstack(pieces)


def planar_compactified_hausdorff(A, B):
    """Hausdorff distance in the compactified plane with g = 1/(1+|p|), brute force."""
    ga = 1.0 / (1.0 + np.linalg.norm(A, axis=1))
    gb = 1.0 / (1.0 + np.linalg.norm(B, axis=1))
    D = np.sqrt(((A[:, None, :] - B[None, :, :]) ** 2).sum(-1))
    D = np.minimum(D, ga[:, None] + gb[None, :])
    return float(max(np.minimum(D.min(axis=1), ga).max(), np.minimum(D.min(axis=0), gb).max()))


def step_graph(jumps, r_max):
    """Completed graph vertices of a step function given as sorted (r, jump size) pairs."""
    verts, v = [(0.0, 0.0)], 0.0
    for r, size in jumps:
        verts.append((r, v))
        v += size
        verts.append((r, v))
    verts.append((r_max, v))
    return np.array(verts)


def fixture_set(count=256):
    """Distinct 1-manifolds in R^2 used across suites."""
    c = M.circle(count=count)
    return {
        "circle": c,
        "circle r=1.5": M.circle(1.5, count=count),
        "circle off-centre": M.circle(1.0, center=(0.3, 0.0), count=count),
        "perturbed circle": M.perturb_normal(c, 0.1),
        "bumped circle": M.perturb_normal(c, 0.1, mode="smooth-bump"),
        "two copies": M.parallel_copies(c, 0.1),
        "x-axis": M.affine_plane(extent=3.0, count=2 * count),
        "tilted line": M.affine_plane(frame=[[math.cos(0.3)], [math.sin(0.3)]], extent=3.0, count=2 * count),
        "parabola": M.graph_of_function(quadratic=[[[1.0]]], extent=1.5, count=2 * count),
        "empty": M.empty(2, 1),
    }
