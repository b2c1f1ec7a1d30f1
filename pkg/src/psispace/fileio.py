"""
Text formats: the MFD sample format and the PTS/EDG/TRI mesh format.

MFD (UTF-8, line oriented, ``#`` starts a comment)::

    MFD 1
    dim <d> ambient <n> count <m> labels <k>
    <n position floats> <d*n frame floats, row-major, rows orthonormal> <weight> [<label>]
    ...

``save`` additionally writes a ``# meta {...}`` comment holding the resolution,
the domain and the generator descriptor, which ``load`` uses when present.

Mesh format::

    PTS <count>
    <x_1> ... <x_n>
    EDG <count>          (polylines, d = 1)
    <i> <j>
    TRI <count>          (triangle meshes, d = 2)
    <i> <j> <k>

Vertex indices are 0-based; sections may appear in any order, ``#`` comments allowed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .manifolds import DiscretizedSubmanifold, LabeledSubmanifold, _build
from .regions import WholeSpace, region_from_dict

__all__ = ["save", "load", "ingest_mesh", "MFDFormatError", "MeshFormatError"]

VERSION = 1
_FRAME_TOL = 1e-6


class MFDFormatError(ValueError):
    """Malformed or unsupported MFD file."""


class MeshFormatError(ValueError):
    """Malformed mesh file or degenerate vertex neighbourhood."""


def _fmt(x):
    return repr(float(x))


def save(W, path):
    """Write a (labeled) discretized submanifold in MFD format at 17 significant digits."""
    labels = None
    if isinstance(W, LabeledSubmanifold):
        W, labels = W.base, W.labels
    n, d, m = W.ambient_dim, W.intrinsic_dim, len(W)
    meta = {"resolution": W.resolution, "domain": W.domain.to_dict()}
    if W.source is not None:
        meta["source"] = W.source.descriptor
    lines = [
        f"MFD {VERSION}",
        f"dim {d} ambient {n} count {m} labels {0 if labels is None else 1}",
        "# meta " + json.dumps(meta, separators=(",", ":")),
    ]
    for i in range(m):
        row = [W.positions[i], W.frames[i].T.reshape(-1), [W.weights[i]]]
        if labels is not None:
            row.append([labels[i]])
        lines.append(" ".join(_fmt(v) for v in np.concatenate(row)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _content_lines(text):
    """``(line number, body)`` of non-blank lines with comments stripped."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.partition("#")[0].strip()
        if body:
            yield lineno, body


def _meta(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        comment = raw.partition("#")[2].strip()
        if comment.startswith("meta "):
            try:
                return json.loads(comment[5:])
            except json.JSONDecodeError as exc:
                raise MFDFormatError(f"line {lineno}: unreadable meta comment ({exc})") from None
    return {}


def load(path):
    """Read an MFD file.

    Returns
    -------
    DiscretizedSubmanifold or LabeledSubmanifold
        Labeled when the header declares ``labels 1``.

    Raises
    ------
    MFDFormatError
        On version mismatch, malformed lines (reported with their line number)
        or frames that are not orthonormal within 1e-6.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MFDFormatError(f"cannot read {path}: {exc}") from None
    lines = list(_content_lines(text))
    if not lines:
        raise MFDFormatError("empty file")
    lineno, first = lines[0]
    parts = first.split()
    if len(parts) != 2 or parts[0] != "MFD":
        raise MFDFormatError(f"line {lineno}: expected 'MFD {VERSION}' header")
    if parts[1] != str(VERSION):
        raise MFDFormatError(f"line {lineno}: unsupported MFD version {parts[1]!r} (expected {VERSION})")
    if len(lines) < 2:
        raise MFDFormatError("missing dimension line")
    lineno, second = lines[1]
    tok = second.split()
    if len(tok) != 8 or tok[0::2] != ["dim", "ambient", "count", "labels"]:
        raise MFDFormatError(f"line {lineno}: expected 'dim <d> ambient <n> count <m> labels <k>'")
    try:
        d, n, m, k = (int(t) for t in tok[1::2])
    except ValueError:
        raise MFDFormatError(f"line {lineno}: non-integer header field") from None
    if not (0 <= d < n) or m < 0 or k not in (0, 1):
        raise MFDFormatError(f"line {lineno}: invalid header values d={d} n={n} count={m} labels={k}")
    rows = lines[2:]
    if len(rows) != m:
        raise MFDFormatError(f"header declares {m} samples but {len(rows)} data lines follow")
    width = n + d * n + 1 + k
    data = np.empty((m, width))
    for i, (lineno, body) in enumerate(rows):
        fields = body.split()
        if len(fields) != width:
            raise MFDFormatError(f"line {lineno}: expected {width} values, found {len(fields)}")
        try:
            data[i] = [float(f) for f in fields]
        except ValueError:
            raise MFDFormatError(f"line {lineno}: non-numeric value") from None
        if not np.all(np.isfinite(data[i])):
            raise MFDFormatError(f"line {lineno}: non-finite value")
        rows_ = data[i, n : n + d * n].reshape(d, n)
        gram = rows_ @ rows_.T
        if not np.allclose(gram, np.eye(d), atol=_FRAME_TOL, rtol=0):
            bad = int(np.argmax(np.abs(gram - np.eye(d)).max(axis=1)))
            raise MFDFormatError(
                f"line {lineno}: frame row {bad} is not orthonormal (norm {np.sqrt(gram[bad, bad]):.6g})"
            )
        if data[i, n + d * n] < 0:
            raise MFDFormatError(f"line {lineno}: negative weight")
    positions = data[:, :n]
    frames = data[:, n : n + d * n].reshape(m, d, n).transpose(0, 2, 1)
    weights = data[:, n + d * n]
    meta = _meta(text)
    domain = region_from_dict(meta.get("domain")) if meta.get("domain") else WholeSpace()
    resolution = meta.get("resolution") or _estimate_resolution(positions)
    source = None
    if meta.get("source"):
        try:
            source = _build(meta["source"])
        except (ValueError, KeyError, TypeError):
            source = None
        if source is not None and (
            source.params.shape[0] != m
            or not np.allclose(source.embed(source.params), positions, atol=1e-9, rtol=0)
        ):
            source = None
    W = DiscretizedSubmanifold(positions, frames, weights, resolution, domain, source)
    if k:
        return LabeledSubmanifold(W, data[:, -1])
    return W


def _estimate_resolution(positions):
    if positions.shape[0] < 2:
        return 1.0
    dist, _ = cKDTree(positions).query(positions, k=2)
    h = float(dist[:, 1].max())
    return h if h > 0 else 1.0


def _parse_mesh(text):
    sections, current, expected = {}, None, 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.partition("#")[0].strip()
        if not body:
            continue
        tok = body.split()
        if tok[0] in ("PTS", "EDG", "TRI"):
            if current is not None and len(sections[current]) != expected:
                raise MeshFormatError(f"section {current} declares {expected} rows, found {len(sections[current])}")
            if len(tok) != 2:
                raise MeshFormatError(f"line {lineno}: expected '{tok[0]} <count>'")
            current, expected = tok[0], int(tok[1])
            sections[current] = []
            continue
        if current is None:
            raise MeshFormatError(f"line {lineno}: data before any section header")
        try:
            sections[current].append([float(t) if current == "PTS" else int(t) for t in tok])
        except ValueError:
            raise MeshFormatError(f"line {lineno}: malformed {current} row") from None
    if current is not None and len(sections[current]) != expected:
        raise MeshFormatError(f"section {current} declares {expected} rows, found {len(sections[current])}")
    return sections


def ingest_mesh(path, d):
    """Read a polyline (d = 1) or triangle mesh (d = 2) as a discretized submanifold.

    One sample per vertex. The tangent plane is the top-d principal subspace of
    the vertex together with its edge-adjacent neighbours; the weight is half the
    incident edge length (d = 1) or a third of the incident triangle area (d = 2).
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MeshFormatError(f"cannot read {path}: {exc}") from None
    sec = _parse_mesh(text)
    if "PTS" not in sec or not sec["PTS"]:
        raise MeshFormatError("missing PTS section")
    pts = np.asarray(sec["PTS"], dtype=float)
    if pts.ndim != 2:
        raise MeshFormatError("PTS rows must all have the same dimension")
    nv, n = pts.shape
    if d not in (1, 2) or d >= n:
        raise MeshFormatError(f"unsupported intrinsic dimension {d} in R^{n}")
    key, arity = ("EDG", 2) if d == 1 else ("TRI", 3)
    cells = np.asarray(sec.get(key, []), dtype=int).reshape(-1, arity)
    if cells.size and (cells.min() < 0 or cells.max() >= nv):
        raise MeshFormatError(f"{key} index out of range")
    weights = np.zeros(nv)
    neighbours = [set([i]) for i in range(nv)]
    for cell in cells:
        p = pts[cell]
        if d == 1:
            measure = np.linalg.norm(p[1] - p[0])
        else:
            e1, e2 = p[1] - p[0], p[2] - p[0]
            measure = 0.5 * np.sqrt(max(np.dot(e1, e1) * np.dot(e2, e2) - np.dot(e1, e2) ** 2, 0.0))
        weights[cell] += measure / arity
        for a in cell:
            neighbours[a].update(int(b) for b in cell)
    frames = np.empty((nv, n, d))
    for i in range(nv):
        ring = pts[sorted(neighbours[i])]
        centered = ring - ring.mean(axis=0)
        cov = centered.T @ centered
        evals, evecs = np.linalg.eigh(cov)
        scale = max(evals[-1], 1e-300)
        if np.sum(evals > 1e-12 * scale) < d or evals[-1] <= 0:
            raise MeshFormatError(f"vertex {i}: degenerate neighbourhood (rank < {d})")
        top = evecs[:, ::-1][:, :d]
        q, r = np.linalg.qr(top)
        signs = np.sign(np.diagonal(r))
        signs[signs == 0] = 1
        frames[i] = q * signs
    lengths = [np.linalg.norm(pts[c[0]] - pts[c[1]]) for c in cells] if d == 1 else [
        np.linalg.norm(pts[c[a]] - pts[c[b]]) for c in cells for a, b in ((0, 1), (1, 2), (0, 2))
    ]
    resolution = float(max(lengths)) if lengths else 1.0
    return DiscretizedSubmanifold(pts, frames, weights, resolution)
