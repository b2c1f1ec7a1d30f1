import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import fixture_set, random_rotation, rotation_2d
from psispace import manifolds as M
from psispace.geometry import INFINITY
from psispace.scanning import (
    AffinePlane,
    MAX_GRID_POINTS,
    ScanSection,
    box_grid,
    default_grid,
    fiber_gauge,
    scan_at,
    scan_metric,
    scan_section,
    section_distance,
)

X_AXIS = M.affine_plane(extent=3.0, count=601)
SMALL_GRID = box_grid([(-1.0, 1.0, 0.5)] * 2)


def test_empty_scans_to_infinity():
    assert scan_at(M.empty(), [0.3, 0.1]) is INFINITY
    assert not scan_section(M.empty(), SMALL_GRID).finite.any()


def test_x_axis_offset():
    v = scan_at(X_AXIS, [0.0, 0.2])
    assert v.offset.tolist() == pytest.approx([0.0, -0.2])
    assert np.allclose(np.abs(v.plane.frame[:, 0]), [1.0, 0.0])


def test_circle_centre_is_ambiguous():
    assert scan_at(M.circle(), [0.0, 0.0]) is INFINITY


def test_far_points_scan_to_infinity():
    assert scan_at(X_AXIS, [0.0, 1.5]) is INFINITY
    assert scan_at(X_AXIS, [0.0, 1.5], rho=2.0) is not INFINITY


def test_x_axis_section_on_small_grid():
    s = scan_section(X_AXIS, SMALL_GRID)
    assert len(s) == 25 and s.finite.all()
    assert np.allclose(s.offsets[:, 1], -s.grid[:, 1]) and np.allclose(s.offsets[:, 0], 0.0)


def test_affine_plane_must_be_orthogonal():
    with pytest.raises(ValueError, match="orthogonal"):
        AffinePlane([1.0, 0.0], scan_at(X_AXIS, [0.0, 0.0]).plane)


def test_distinct_lines_have_distinct_sections():
    other = M.affine_plane(basepoint=[0.0, 0.3], extent=3.0, count=601)
    a, b = scan_section(X_AXIS, SMALL_GRID), scan_section(other, SMALL_GRID)
    assert not np.allclose(a.offsets, b.offsets)


def test_grid_cap():
    with pytest.raises(ValueError, match="grid too large"):
        box_grid([(0.0, 1.0, 1e-4)] * 2)
    assert len(default_grid(2)) == 17 * 17


def test_section_distance_requires_same_grid():
    with pytest.raises(ValueError, match="grid mismatch"):
        section_distance(scan_section(X_AXIS, SMALL_GRID), scan_section(X_AXIS, default_grid(2)))


def test_infinity_versus_x_axis_closed_form():
    s_inf = scan_section(M.empty(), SMALL_GRID)
    s = scan_section(X_AXIS, SMALL_GRID)
    p = SMALL_GRID
    expected = np.max((1 - np.abs(p[:, 1])) / (1 + np.linalg.norm(p, axis=1)))
    assert section_distance(s_inf, s) == pytest.approx(expected, abs=1e-12)
    assert expected > 0


@pytest.mark.parametrize("delta", [0.01, 0.1, 0.3, 0.5])
def test_parallel_lines_are_at_most_delta_apart(delta):
    other = M.affine_plane(basepoint=[0.0, delta], extent=3.0, count=601)
    assert scan_metric(X_AXIS, other) <= delta + 1e-12


def test_fiber_gauge_vanishes_at_scan_radius():
    assert fiber_gauge(0.0, 1.0) == 1.0
    assert fiber_gauge(1.0, 1.0) == 0.0
    assert fiber_gauge(0.25, 0.5) == pytest.approx(0.25)


def test_scan_metric_identity():
    W = M.circle(count=256)
    assert scan_metric(W, W) == 0.0


def test_distinct_fixtures_are_separated():
    fx = fixture_set()
    names = sorted(fx)
    sections = {k: scan_section(fx[k]) for k in names}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            assert section_distance(sections[a], sections[b]) > 1e-3, (a, b)


def test_normal_family_converges():
    W = M.circle(count=512)
    values = [scan_metric(W, M.perturb_normal(W, d)) for d in (0.1, 0.01, 0.001)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 0.02


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.integers(0, 1000))
def test_rotation_equivariance(theta, seed):
    R = rotation_2d(theta)
    W = M.perturb_normal(M.circle(count=256), 0.2, mode="smooth-bump")
    V = M.rotate(W, R)
    rng = np.random.default_rng(seed)
    for p in rng.uniform(-2, 2, size=(20, 2)):
        a, b = scan_at(W, p), scan_at(V, R @ p)
        assert (a is INFINITY) == (b is INFINITY)
        if a is not INFINITY:
            assert np.allclose(R @ a.offset, b.offset, atol=1e-9)
            assert np.allclose(R @ a.plane.projector() @ R.T, b.plane.projector(), atol=1e-9)


def test_rotation_equivariance_of_sphere_in_r3():
    rng = np.random.default_rng(5)
    R = random_rotation(rng, 3)
    W = M.sphere(3, 1.0, 400)
    V = M.rotate(W, R)
    for p in rng.uniform(-1.5, 1.5, size=(30, 3)):
        a, b = scan_at(W, p), scan_at(V, R @ p)
        assert (a is INFINITY) == (b is INFINITY)
        if a is not INFINITY:
            assert np.allclose(R @ a.offset, b.offset, atol=1e-9)


fx = {k: v for k, v in fixture_set(128).items()}
SECTIONS = {k: scan_section(v) for k, v in fx.items()}
names = st.sampled_from(sorted(SECTIONS))


@settings(max_examples=100, deadline=None)
@given(names, names, names)
def test_section_distance_metric_axioms(a, b, c):
    A, B, C = SECTIONS[a], SECTIONS[b], SECTIONS[c]
    ab = section_distance(A, B)
    assert section_distance(A, A) == 0.0
    assert ab == section_distance(B, A)
    assert ab <= section_distance(A, C) + section_distance(C, B) + 1e-9


def test_csv_layout():
    s = scan_section(M.circle(), SMALL_GRID)
    lines = s.to_csv().splitlines()
    assert lines[0] == "p0,p1,finite,o0,o1,f00,f10"
    assert len(lines) == 26
    centre = [ln for ln in lines[1:] if ln.startswith("0.0,0.0,")]
    assert centre == ["0.0,0.0,0,,,,"]
    assert isinstance(s, ScanSection) and MAX_GRID_POINTS == 10**6
