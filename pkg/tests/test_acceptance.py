"""
Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines are repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import contextlib
import io
import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import brute_grassmann, random_frame, random_rotation, rotation_2d  # noqa: E402
from psispace import manifolds as M  # noqa: E402
from psispace.cli import main  # noqa: E402
from psispace.fileio import save  # noqa: E402
from psispace.geometry import (  # noqa: E402
    INFINITY,
    ClosedSetSample,
    GaussPoint,
    GrassPlane,
    compactified_distance,
    grassmann_distance,
    grassmann_distances,
    hausdorff_distance,
)
from psispace.metrics import (  # noqa: E402
    default_r_grid,
    fell_hausdorff,
    gr_w_distance,
    volume_function,
    volume_pseudodistance,
)
from psispace.neighborhoods import (  # noqa: E402
    NeighborhoodSpec,
    displacement,
    in_gs_neighborhood,
    in_ls_neighborhood,
    sheet_volume_ratio,
)
from psispace.regions import Ball, Box  # noqa: E402
from psispace.scanning import default_grid, scan_at, scan_metric, scan_section, section_distance  # noqa: E402

# pinned tolerances
AXIOM_TOL = 1e-9
AXIOM_TRIPLES = 200
AXIOM_SECONDS = 30
GRASS_TOL = 1e-2
GRASS_PAIRS = 200
GRASS_DIRECTIONS = 10_000
GRASS_SECONDS = 60
DISPLACEMENT_TOL = 1e-6
TWO_COPY_DELTAS = (0.1, 0.05, 0.01)
TWO_COPY_FINAL_DH = 0.02
TWO_COPY_MIN_DNU = 0.3
TWO_COPY_EPS = 0.5
TWO_COPY_SECONDS = 60
IMPLICATION_PAIRS = 50
SHEET_RATIO_TOL = 0.10
SPHERE_TOL = 1e-3
JUMP_REL_TOL = 0.01
SCAN_SEPARATION = 1e-3
SCAN_CONVERGED = 0.02
SCAN_EQUIVARIANCE_TOL = 1e-9
REFINEMENT_REL_TOL = 0.05

RESULTS = []


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    RESULTS.append(line)
    return ok


SQUARE = Box([-1.0, -1.0], [1.0, 1.0])


def _random_point(rng, n, d):
    if rng.random() < 0.1:
        return INFINITY
    return GaussPoint(rng.normal(scale=2.0, size=n), GrassPlane(random_frame(rng, n, d)))


def _random_sample(rng, n, d):
    m = int(rng.integers(0, 12))
    pos = rng.normal(scale=2.0, size=(m, n))
    frames = np.stack([random_frame(rng, n, d) for _ in range(m)]) if m else np.zeros((0, n, d))
    return ClosedSetSample(pos, frames, True)


def _manifold_pool(rng, size=14, count=64):
    pool = [M.empty()]
    while len(pool) < size:
        kind = rng.integers(0, 4)
        if kind == 0:
            pool.append(M.circle(rng.uniform(0.3, 2.0), center=rng.uniform(-1, 1, 2), count=count))
        elif kind == 1:
            theta = rng.uniform(0, math.pi)
            pool.append(M.affine_plane(basepoint=rng.uniform(-1, 1, 2), frame=[[math.cos(theta)], [math.sin(theta)]],
                                       extent=rng.uniform(0.5, 2.5), count=count))
        elif kind == 2:
            pool.append(M.parallel_copies(M.circle(rng.uniform(0.5, 1.5), count=count // 2), rng.uniform(0.05, 0.3)))
        else:
            pool.append(M.perturb_normal(M.circle(rng.uniform(0.5, 1.5), count=count), rng.uniform(0.05, 0.3),
                                         mode="smooth-bump"))
    return pool


def _check_triples(name, dist_matrix, triples, self_dist):
    worst = 0.0
    for i, j, k in triples:
        sym = dist_matrix[i][j] == dist_matrix[j][i]
        tri = dist_matrix[i][j] - (dist_matrix[i][k] + dist_matrix[k][j])
        worst = max(worst, tri)
        if not sym or tri > AXIOM_TOL:
            return False, f"{name}: violation at {(i, j, k)}"
    if any(v != 0.0 for v in self_dist):
        return False, f"{name}: nonzero self-distance"
    return True, f"{name}: worst triangle excess {worst:.1e}"


def test_criterion_1_metric_axioms():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    details, ok = [], True

    bad = 0
    for _ in range(AXIOM_TRIPLES):
        n = int(rng.integers(2, 5))
        d = int(rng.integers(1, n))
        a, b, c = (_random_point(rng, n, d) for _ in range(3))
        ab = compactified_distance(a, b)
        bad += not (ab == compactified_distance(b, a) and compactified_distance(a, a) == 0.0
                    and ab <= compactified_distance(a, c) + compactified_distance(c, b) + AXIOM_TOL)
    ok &= bad == 0
    details.append(f"compactified_distance: {bad} violations")

    bad = 0
    for _ in range(AXIOM_TRIPLES):
        n = int(rng.integers(2, 4))
        d = int(rng.integers(1, n))
        A, B, C = (_random_sample(rng, n, d) for _ in range(3))
        ab = hausdorff_distance(A, B)
        bad += not (ab == hausdorff_distance(B, A) and hausdorff_distance(A, A) == 0.0
                    and ab <= hausdorff_distance(A, C) + hausdorff_distance(C, B) + AXIOM_TOL)
    ok &= bad == 0
    details.append(f"hausdorff_distance: {bad} violations")

    pool = _manifold_pool(rng)
    grid = default_r_grid(*pool)
    idx = range(len(pool))
    triples = [tuple(int(v) for v in rng.integers(0, len(pool), 3)) for _ in range(AXIOM_TRIPLES)]
    sections = [scan_section(W) for W in pool]
    graphs = [volume_function(W, grid) for W in pool]
    from psispace.metrics import _graph_distance

    for name, f in (
        ("d_H", lambda i, j: fell_hausdorff(pool[i], pool[j])),
        ("d_nu", lambda i, j: _graph_distance(graphs[i], graphs[j])),
        ("section_distance", lambda i, j: section_distance(sections[i], sections[j])),
    ):
        D = [[f(i, j) for j in idx] for i in idx]
        good, msg = _check_triples(name, D, triples, [D[i][i] for i in idx])
        ok &= good
        details.append(msg)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < AXIOM_SECONDS
    assert record(1, ok, f"{AXIOM_TRIPLES} triples each; " + "; ".join(details) + f"; {elapsed:.1f}s")


def test_criterion_2_grassmann_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(GRASS_PAIRS):
        n = int(rng.integers(2, 6))
        d = int(rng.integers(1, n))
        fa, fb = random_frame(rng, n, d), random_frame(rng, n, d)
        exact = grassmann_distance(GrassPlane(fa), GrassPlane(fb))
        worst = max(worst, abs(exact - brute_grassmann(fa, fb, rng, GRASS_DIRECTIONS)))
    elapsed = time.perf_counter() - t0
    ok = worst <= GRASS_TOL and elapsed < GRASS_SECONDS
    assert record(2, ok, f"max |d1 - sampled max-min| = {worst:.2e} over {GRASS_PAIRS} pairs; {elapsed:.1f}s")


def test_criterion_3_closed_forms():
    a, m = 0.3, 0.1
    e1 = GrassPlane([1.0, 0.0])
    shift = displacement(GaussPoint([0.7, 0.0], e1), GaussPoint([0.7, a], e1))
    tilt = displacement(GaussPoint([0.7, 0.0], e1), GaussPoint([0.7, m * 0.7], GrassPlane.span([1.0, m])))
    ok = abs(shift[0] - a) < DISPLACEMENT_TOL and abs(shift[1]) < DISPLACEMENT_TOL
    ok &= abs(tilt[1] - m) < DISPLACEMENT_TOL
    # the tilt section at the origin: zero norm, slope m
    at_origin = displacement(GaussPoint([0.0, 0.0], e1), GaussPoint([0.0, 0.0], GrassPlane.span([1.0, m])))
    ok &= abs(at_origin[0]) < DISPLACEMENT_TOL and abs(at_origin[1] - m) < DISPLACEMENT_TOL

    W = M.affine_plane(extent=1.5, count=1201)
    V = M.perturb_normal(W, m, mode="tilt")
    step = 1e-3
    analytic = m * 1.0 + m
    eps_grid = np.arange(0.1, 0.3 + step / 2, step)
    flip = next(e for e in eps_grid if in_gs_neighborhood(W, V, NeighborhoodSpec(SQUARE, e)).member)
    ok &= abs(flip - analytic) <= step
    assert record(3, ok, f"shift {shift}, tilt slope {at_origin[1]:.9f}; gs flips at eps = {flip:.3f} "
                         f"(analytic {analytic:.3f}, step {step})")


def test_criterion_4_two_copies():
    t0 = time.perf_counter()
    W = M.circle(count=512)
    spec = NeighborhoodSpec(SQUARE, TWO_COPY_EPS)
    d_h, d_nu, gs, ls = [], [], [], []
    for delta in TWO_COPY_DELTAS:
        V = M.parallel_copies(W, delta)
        d_h.append(fell_hausdorff(W, V))
        d_nu.append(volume_pseudodistance(W, V))
        gs.append(in_gs_neighborhood(W, V, spec).member)
        ls.append(in_ls_neighborhood(W, V, spec).member)
    elapsed = time.perf_counter() - t0
    checks = {
        "d_H decreasing": all(x > y for x, y in zip(d_h, d_h[1:])),
        "final d_H < 0.02": d_h[-1] < TWO_COPY_FINAL_DH,
        "d_nu > 0.3": all(v > TWO_COPY_MIN_DNU for v in d_nu),
        "gs false": not any(gs),
        "ls true for delta <= 0.05": all(l for dl, l in zip(TWO_COPY_DELTAS, ls) if dl <= 0.05),
        "runtime": elapsed < TWO_COPY_SECONDS,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (f"d_H {[round(v, 4) for v in d_h]}, d_nu {[round(v, 4) for v in d_nu]}, gs {gs}, ls {ls}; "
              f"{elapsed:.1f}s" + (f"; failed: {failed}" if failed else ""))
    assert record(4, not failed, detail)


def _family_pairs(rng, count):
    pairs = []
    for _ in range(count):
        base = M.circle(rng.uniform(0.6, 1.4), count=256) if rng.random() < 0.6 else M.affine_plane(extent=2.0, count=400)
        kind = rng.integers(0, 4)
        delta = float(rng.uniform(0.005, 0.3))
        if kind == 0:
            other = M.perturb_normal(base, delta)
        elif kind == 1:
            other = M.parallel_copies(base, delta)
        elif kind == 2:
            other = M.perturb_normal(base, delta, mode="smooth-bump")
        else:
            other = M.perturb_normal(base, delta * 0.5, mode="tilt")
        K = Ball(rng.uniform(-0.5, 0.5, 2), rng.uniform(0.5, 2.0)) if rng.random() < 0.5 else SQUARE
        pairs.append((base, other, NeighborhoodSpec(K, float(rng.uniform(0.05, 0.6)))))
    return pairs


def _min_compactified(W, V_pos, V_frames):
    gw = 1.0 / (1.0 + np.linalg.norm(W.positions, axis=1))
    out = np.empty(len(V_pos))
    for i, (y, f) in enumerate(zip(V_pos, V_frames)):
        gy = 1.0 / (1.0 + np.linalg.norm(y))
        d = np.linalg.norm(W.positions - y, axis=1) + grassmann_distances(W.frames, f[None])
        out[i] = min(np.minimum(d, gw + gy).min(initial=np.inf), gy)
    return out


def test_criterion_5_ls_implies_fell_closeness():
    rng = np.random.default_rng(505)
    members = violations = 0
    for W, V, spec in _family_pairs(rng, IMPLICATION_PAIRS):
        if not in_ls_neighborhood(W, V, spec).member:
            continue
        members += 1
        inside = spec.K.contains(V.positions)
        dist = _min_compactified(W, V.positions[inside], V.frames[inside])
        violations += int(np.sum(dist >= spec.eps))
    ok = violations == 0 and members > 0
    assert record(5, ok, f"{members}/{IMPLICATION_PAIRS} pairs in ls neighbourhood, {violations} violations")


def test_criterion_6_sheet_volume():
    eps = 0.05
    line = M.affine_plane(extent=2.0, count=400)
    circ = M.circle(count=512)
    fixtures = [
        ("line shift", line, M.perturb_normal(line, 0.02), SQUARE, 1),
        ("circle shift", circ, M.perturb_normal(circ, 0.02), Ball([0.0, 0.0], 2.0), 1),
        ("line copies", line, M.parallel_copies(line, 0.02), SQUARE, 2),
        ("circle copies", circ, M.parallel_copies(circ, 0.02), Ball([0.0, 0.0], 2.0), 2),
    ]
    ok, parts = True, []
    for name, W, V, K, sheets in fixtures:
        rep = in_ls_neighborhood(W, V, NeighborhoodSpec(K, eps))
        ratio = sheet_volume_ratio(W, V, rep.decomposition)
        good = abs(ratio - sheets) <= SHEET_RATIO_TOL * sheets and rep.member
        ok &= good
        parts.append(f"{name} {ratio:.4f}/{sheets}")
    assert record(6, ok, ", ".join(parts))


def test_criterion_7_spot_values():
    errs = []
    for R in (1.0, 2.0, 5.0):
        errs.append(abs(fell_hausdorff(M.empty(3, 2), M.sphere(3, R, 1000)) - 1 / (1 + R)))
    W = M.circle(count=512)
    jumps = volume_function(W, default_r_grid(W)).jumps
    ok = max(errs) <= SPHERE_TOL and len(jumps) == 1
    if len(jumps) == 1:
        r, lo, hi = jumps[0]
        ok &= abs(r - 1.0) <= JUMP_REL_TOL and abs((hi - lo) - 2 * math.pi) <= JUMP_REL_TOL * 2 * math.pi
    assert record(7, ok, f"max sphere error {max(errs):.1e}; jumps {jumps.round(6).tolist()}")


def test_criterion_8_scanning():
    from helpers import fixture_set

    fx = fixture_set(256)
    sections = {k: scan_section(v) for k, v in fx.items()}
    sep = min(section_distance(sections[a], sections[b]) for a, b in itertools.combinations(sorted(fx), 2))
    W = M.circle(count=512)
    conv = scan_metric(W, M.perturb_normal(W, 0.001))
    worst = 0.0
    mismatches = 0
    rng = np.random.default_rng(808)
    base = M.perturb_normal(W, 0.2, mode="smooth-bump")
    for theta in rng.uniform(0, 2 * math.pi, 5):
        R = rotation_2d(theta)
        V = M.rotate(base, R)
        for p in default_grid(2):
            a, b = scan_at(base, p), scan_at(V, R @ p)
            if (a is INFINITY) != (b is INFINITY):
                mismatches += 1
            elif a is not INFINITY:
                worst = max(worst, np.abs(R @ a.offset - b.offset).max(),
                            np.abs(R @ a.plane.projector() @ R.T - b.plane.projector()).max())
    R3 = random_rotation(rng, 3)
    S = M.sphere(3, 1.0, 400)
    for p in default_grid(3):
        a, b = scan_at(S, p), scan_at(M.rotate(S, R3), R3 @ p)
        if (a is INFINITY) != (b is INFINITY):
            mismatches += 1
        elif a is not INFINITY:
            worst = max(worst, np.abs(R3 @ a.offset - b.offset).max())
    ok = sep > SCAN_SEPARATION and conv < SCAN_CONVERGED and worst <= SCAN_EQUIVARIANCE_TOL and mismatches == 0
    assert record(8, ok, f"min separation {sep:.4f}; scan at delta=0.001: {conv:.5f}; "
                         f"equivariance error {worst:.1e}, {mismatches} finite/infinite mismatches")


def _refinement_pairs(k):
    c = M.circle(count=k)
    line = M.affine_plane(extent=2.0, count=k)
    return {
        "shift": (c, M.perturb_normal(c, 0.1)),
        "copies": (c, M.parallel_copies(c, 0.1)),
        "bump": (c, M.perturb_normal(c, 0.2, mode="smooth-bump")),
        "radius": (c, M.circle(1.5, count=k)),
        "tilt": (line, M.perturb_normal(line, 0.2, mode="tilt")),
        "empty": (M.empty(), c),
    }


def test_criterion_9_refinement():
    coarse, fine = _refinement_pairs(512), _refinement_pairs(1024)
    worst, where = 0.0, ""
    for name in coarse:
        a, b = gr_w_distance(*coarse[name]), gr_w_distance(*fine[name])
        for field in ("d_H", "d_nu", "d_psi"):
            x, y = getattr(a, field), getattr(b, field)
            rel = abs(x - y) / max(abs(x), 1e-12) if x or y else 0.0
            if rel >= worst:
                worst, where = rel, f"{name}/{field}"
    assert record(9, worst < REFINEMENT_REL_TOL, f"max relative change {worst:.2e} ({where})")


def _converge_bytes(tmp, base, threads):
    buf = io.StringIO()
    svg = tmp / f"t{threads}.svg"
    with contextlib.redirect_stdout(buf):
        code = main(["converge", "--family", "parallel-copies", "--base", str(base), "--deltas", "0.1,0.05,0.01",
                     "--threads", str(threads), "--svg", str(svg)])
    assert code == 0
    return buf.getvalue().encode() + svg.read_bytes()


def test_criterion_10_determinism(tmp_path):
    base = tmp_path / "c.mfd"
    save(M.circle(count=512), base)
    outputs = [_converge_bytes(tmp_path, base, t) for t in (1, 4, 8, 1, 4, 8)]
    ok = len(set(outputs)) == 1
    assert record(10, ok, f"{len(set(outputs))} distinct output(s) over 2 runs x threads 1/4/8")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
