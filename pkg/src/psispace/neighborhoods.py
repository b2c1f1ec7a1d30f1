"""
Membership in basic neighbourhoods (K, eps) of a submanifold W.

The normal bundle and exponential map of W are never built. A sample y of W'
is paired with its nearest sample x of W; ``|x - y|`` and ``tan d1(T_xW, T_yW')``
then stand for the norm and the normal derivative of the local section taking
x to y. Sheet counts (how many samples of W' pair with each x) decide between a
single global section (gs), a covering by local sections (ls), and the labeled
variants (ms, ss).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .geometry import grassmann_distances
from .manifolds import LabeledSubmanifold

__all__ = [
    "NeighborhoodSpec",
    "SheetDecomposition",
    "MembershipReport",
    "displacement",
    "tubular_projection",
    "sheet_volume_ratio",
    "in_gs_neighborhood",
    "in_ls_neighborhood",
    "in_ms_neighborhood",
    "in_ss_neighborhood",
    "ADJACENCY_SCALE",
]

ADJACENCY_SCALE = 3.0


@dataclass(frozen=True)
class NeighborhoodSpec:
    """A basic neighbourhood: compact region ``K``, tolerance ``eps`` and optional label tolerance."""

    K: object
    eps: float
    label_eps: float | None = None

    def __post_init__(self):
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.label_eps is not None and not self.label_eps > 0:
            raise ValueError("label tolerance must be positive")


def displacement(x, y):
    """Norm and slope of the local normal section taking ``x`` to ``y``.

    Parameters
    ----------
    x, y : GaussPoint
        A sample of W and the sample of W' it is paired with.

    Returns
    -------
    (float, float)
        ``(|x - y|, tan d1(T_xW, T_yW'))``; the slope is ``inf`` for orthogonal planes.
    """
    if x.position.shape != y.position.shape or x.plane.frame.shape != y.plane.frame.shape:
        raise ValueError("incompatible points: dimensions differ")
    norm, slope = _displacements(
        x.position[None], x.plane.frame[None], y.position[None], y.plane.frame[None]
    )
    return float(norm[0]), float(slope[0])


def _displacements(px, fx, py, fy):
    diff = px - py
    norm = np.sqrt(np.sum(diff * diff, axis=-1))
    angle = grassmann_distances(fx, fy)
    with np.errstate(over="ignore"):
        slope = np.where(angle >= math.pi / 2 - 1e-12, np.inf, np.tan(angle))
    return norm, slope


@dataclass(frozen=True, eq=False)
class SheetDecomposition:
    """Nearest-point projection of W' onto W within a tube.

    Attributes
    ----------
    tube_radius : float
    sources, targets : ndarray of int
        Paired sample indices into W' and W.
    norms, slopes : ndarray
        ``|f(x)|`` and ``|tau Df(x)|`` per pair.
    sheet_counts : ndarray of int, shape (len(W),)
        Number of W' samples projecting to each W sample.
    in_K : ndarray of bool, shape (len(W),)
        W samples lying in K.
    source_in_K : ndarray of bool, shape (len(W'),)
        W' samples lying in K.
    orphans : ndarray of int
        W' samples in K that lie outside the tube.
    coverage_ok : bool
        Every W sample in K receives at least one W' sample.
    local_diffeo_ok : bool
        Sheet counts are constant on each adjacency component of W n K.
    components : ndarray of int, shape (len(W),)
        Adjacency component label of each W sample in K (-1 outside K).
    """

    tube_radius: float
    sources: np.ndarray
    targets: np.ndarray
    norms: np.ndarray
    slopes: np.ndarray
    sheet_counts: np.ndarray
    in_K: np.ndarray
    source_in_K: np.ndarray
    orphans: np.ndarray
    coverage_ok: bool
    local_diffeo_ok: bool
    components: np.ndarray = field(repr=False)

    @property
    def pairs(self):
        return list(zip(self.sources.tolist(), self.targets.tolist(), self.norms.tolist(), self.slopes.tolist()))


def _nearest(tree, queries, m):
    """Nearest indices with ties broken by the lowest index."""
    k = min(m, 8)
    dist, idx = tree.query(queries, k=k)
    if k == 1:
        return dist, idx
    dist = np.asarray(dist).reshape(len(queries), k)
    idx = np.asarray(idx).reshape(len(queries), k)
    best = dist[:, 0]
    tied = dist == best[:, None]
    masked = np.where(tied, idx, np.iinfo(np.int64).max)
    return best, masked.min(axis=1)


def _adjacency_components(points, scale):
    m = len(points)
    if m == 0:
        return np.zeros(0, dtype=int)
    tree = cKDTree(points)
    pairs = tree.query_pairs(scale, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    _, labels = connected_components(graph, directed=False)
    return labels


def tubular_projection(W, W2, K, tube_radius):
    """Pair each sample of W2 within ``tube_radius`` of W with its nearest W sample.

    Sheet counts are tallied for every W sample; the coverage and covering-map
    checks look at W samples inside ``K``. W2 samples inside ``K`` that fall
    outside the tube are orphans.
    """
    if not tube_radius > 0:
        raise ValueError("tube radius must be positive")
    if (W.ambient_dim, W.intrinsic_dim) != (W2.ambient_dim, W2.intrinsic_dim):
        raise ValueError("dimension mismatch between W and W'")
    m, m2 = len(W), len(W2)
    in_K = K.contains(W.positions) if m else np.zeros(0, dtype=bool)
    src_in_K = K.contains(W2.positions) if m2 else np.zeros(0, dtype=bool)
    if m and m2:
        dist, near = _nearest(cKDTree(W.positions), W2.positions, m)
        paired = dist <= tube_radius
    else:
        dist = np.full(m2, np.inf)
        near = np.zeros(m2, dtype=int)
        paired = np.zeros(m2, dtype=bool)
    sources = np.flatnonzero(paired)
    targets = near[paired].astype(int)
    norms, slopes = _displacements(
        W.positions[targets], W.frames[targets], W2.positions[sources], W2.frames[sources]
    ) if sources.size else (np.zeros(0), np.zeros(0))
    counts = np.bincount(targets, minlength=m) if m else np.zeros(0, dtype=int)
    orphans = np.flatnonzero(src_in_K & ~paired)
    coverage_ok = bool(np.all(counts[in_K] >= 1))
    components = np.full(m, -1)
    local_ok = True
    idx_K = np.flatnonzero(in_K)
    if idx_K.size:
        labels = _adjacency_components(W.positions[idx_K], ADJACENCY_SCALE * W.resolution)
        components[idx_K] = labels
        for lab in np.unique(labels):
            c = counts[idx_K[labels == lab]]
            if c.min() != c.max():
                local_ok = False
                break
    return SheetDecomposition(
        float(tube_radius), sources, targets, norms, slopes, counts, in_K, src_in_K,
        orphans, coverage_ok, local_ok, components,
    )


def sheet_volume_ratio(W, W2, decomposition):
    """Volume of W' over its image in W n K: the averaged number of sheets.

    Numerator: total weight of W' samples projecting into W n K. Denominator:
    total weight of the W samples in K that receive at least one of them.
    """
    dec = decomposition
    hit = dec.in_K[dec.targets]
    numerator = float(W2.weights[dec.sources[hit]].sum())
    covered = dec.in_K & (dec.sheet_counts >= 1)
    denominator = float(W.weights[covered].sum())
    if denominator == 0:
        return 0.0 if numerator == 0 else math.inf
    return numerator / denominator


@dataclass
class MembershipReport:
    """Outcome of a membership test: one ``(clause, passed, detail)`` entry per clause."""

    kind: str
    clauses: list = field(default_factory=list)
    decomposition: SheetDecomposition | None = None

    def add(self, name, passed, detail=""):
        self.clauses.append((name, bool(passed), detail))

    @property
    def member(self):
        return all(ok for _, ok, _ in self.clauses)

    def __bool__(self):
        return self.member

    def violated(self):
        return [name for name, ok, _ in self.clauses if not ok]

    def to_text(self):
        lines = []
        for name, ok, detail in self.clauses:
            lines.append(f"{name}: PASS" if ok else f"{name}: FAIL {detail}".rstrip())
        return "\n".join(lines)


def _tube_radius(W, spec):
    return max(spec.eps, 2.0 * W.resolution)


def _base_clauses(W, W2, spec, kind, single_sheet):
    dec = tubular_projection(W, W2, spec.K, _tube_radius(W, spec))
    report = MembershipReport(kind, decomposition=dec)
    report.add(
        "no orphans",
        dec.orphans.size == 0,
        f"{dec.orphans.size} samples of W' in K lie outside the tube (first: {dec.orphans[:1].tolist()})",
    )
    uncovered = np.flatnonzero(dec.in_K & (dec.sheet_counts == 0))
    report.add(
        "coverage",
        dec.coverage_ok,
        f"{uncovered.size} samples of W n K receive no sample of W' (first: {uncovered[:1].tolist()})",
    )
    if single_sheet:
        bad = np.flatnonzero(dec.in_K & (dec.sheet_counts != 1))
        report.add(
            "single sheet",
            bad.size == 0,
            f"{bad.size} samples of W n K have sheet count != 1 "
            f"(counts seen: {sorted(set(dec.sheet_counts[bad].tolist()))[:5]})",
        )
    else:
        report.add("covering map", dec.local_diffeo_ok, "sheet count varies within a component of W n K")
    active = dec.source_in_K[dec.sources]
    total = dec.norms[active] + dec.slopes[active]
    worst = float(total.max()) if total.size else 0.0
    report.add("c1 bound", worst < spec.eps, f"sup |f| + |tau Df| = {worst:.6g} >= eps = {spec.eps:.6g}")
    return report


def in_gs_neighborhood(W, W2, spec):
    """Is W' in (K, eps)^gs of W: W' n K is the image of one global normal section with C^1 size < eps?"""
    return _base_clauses(W, W2, spec, "gs", single_sheet=True)


def in_ls_neighborhood(W, W2, spec):
    """Is W' in (K, eps)^ls of W: W' n K is covered by local normal sections with C^1 size < eps?"""
    return _base_clauses(W, W2, spec, "ls", single_sheet=False)


def _labels(LW):
    if not isinstance(LW, LabeledSubmanifold):
        raise ValueError("missing labels: a LabeledSubmanifold is required")
    return LW.base, LW.labels


def in_ms_neighborhood(LW, LW2, spec):
    """ls membership plus ``|alpha(x) - sum of alpha'(y) over y projecting to x| < label_eps`` on W n K."""
    W, alpha = _labels(LW)
    W2, alpha2 = _labels(LW2)
    label_eps = spec.eps if spec.label_eps is None else spec.label_eps
    report = _base_clauses(W, W2, spec, "ms", single_sheet=False)
    dec = report.decomposition
    sums = np.bincount(dec.targets, weights=alpha2[dec.sources], minlength=len(W)) if len(W) else np.zeros(0)
    dev = np.abs(alpha - sums)[dec.in_K]
    worst = float(dev.max()) if dev.size else 0.0
    report.add("label sums", worst < label_eps, f"max |alpha - sum alpha'| = {worst:.6g} >= {label_eps:.6g}")
    return report


def in_ss_neighborhood(LW, LW2, spec):
    """gs membership plus ``|alpha'(y) - alpha(x)| < label_eps`` for every pair with y in K."""
    W, alpha = _labels(LW)
    W2, alpha2 = _labels(LW2)
    label_eps = spec.eps if spec.label_eps is None else spec.label_eps
    report = _base_clauses(W, W2, spec, "ss", single_sheet=True)
    dec = report.decomposition
    active = dec.source_in_K[dec.sources]
    dev = np.abs(alpha2[dec.sources[active]] - alpha[dec.targets[active]])
    worst = float(dev.max()) if dev.size else 0.0
    report.add("labels", worst < label_eps, f"sup |alpha' - alpha| = {worst:.6g} >= {label_eps:.6g}")
    return report
