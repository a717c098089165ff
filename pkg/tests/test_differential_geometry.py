import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from curveft import catalog, oracles
from curveft.differential_geometry import (OrientationError, curvature_closed_form_revolution,
                                           gaussian_curvature_abs, membership_many, normal_cone_coverage,
                                           normal_cone_membership, shape_data, sphere_cells,
                                           stationary_points)
from curveft.surface_model import SubsurfaceSelection, SurfaceError

unit_vectors3 = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).map(np.array).filter(
    lambda v: np.linalg.norm(v) > 0.1).map(lambda v: v / np.linalg.norm(v))


# ---------------------------------------------------------------- shape data


def test_sphere_outward_convention():
    s = catalog.sphere(3)
    top = 4  # +z face
    sd = shape_data(s.charts[top], np.zeros(2), [0, 0, 1], chart_index=top)
    assert np.allclose(sd.normal, [0, 0, 1])
    # II = chi_ab . n, so the outward normal sees principal curvatures -1 and K = +1
    assert np.allclose(sd.principal_curvatures, [-1, -1], atol=1e-12)
    assert sd.gaussian_curvature == pytest.approx(1.0, abs=1e-12)
    assert sd.signature == -2
    inward = shape_data(s.charts[top], np.zeros(2), [0, 0, -1], chart_index=top)
    assert inward.signature == 2


def test_figure1_curvature_at_zero():
    sd = shape_data(catalog.figure1_curve().charts[0], [0.0], [1, 0])
    assert abs(sd.gaussian_curvature) == pytest.approx(1.0, rel=1e-12)


def test_revolution_curvature_at_zero():
    surf = catalog.revolution_surface(3)
    idx, u = catalog.revolution_coords(3, np.array([0.0]))
    sd = shape_data(surf.charts[idx[0]], u[0], [1, 0, 0], chart_index=int(idx[0]))
    assert abs(sd.gaussian_curvature) == pytest.approx(1 / 3, rel=1e-12)


def test_closed_form_values():
    assert curvature_closed_form_revolution(0.0, 3) == pytest.approx(1 / 3)
    assert curvature_closed_form_revolution(math.pi, 3) == pytest.approx(7.0)
    with pytest.raises(SurfaceError):
        curvature_closed_form_revolution(0.0, 1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_closed_form_matches_numerics_on_grid(d):
    theta = (np.arange(256) + 0.5) * 2 * math.pi / 256
    surf = catalog.revolution_surface(d)
    idx, u = catalog.revolution_coords(d, theta)
    k = np.array([gaussian_curvature_abs(surf.charts[i], uu) for i, uu in zip(idx, u)])
    assert np.max(np.abs(k - curvature_closed_form_revolution(theta, d)) / k) <= 1e-8


def test_tangent_orientation_rejected():
    s = catalog.sphere(3)
    with pytest.raises(OrientationError):
        shape_data(s.charts[4], np.zeros(2), [1, 0, 0], chart_index=4)


@given(st.sampled_from([0, 1, 2, 3, 4, 5]), st.floats(-0.7, 0.7), st.floats(-0.7, 0.7), unit_vectors3)
def test_flipping_normal(face, a, b, e):
    s = catalog.sphere(3, semi_axes=(1.0, 1.5, 0.7))
    ch = s.charts[face]
    u = np.array([a, b])
    n = shape_data(ch, u, np.ones(3), chart_index=face).normal
    assume(abs(n @ e) > 0.05)
    p = shape_data(ch, u, e, chart_index=face)
    q = shape_data(ch, u, -e, chart_index=face)
    assert np.allclose(p.normal, -q.normal)
    assert np.allclose(p.second_form, -q.second_form, atol=1e-12)
    assert np.allclose(np.sort(p.principal_curvatures), np.sort(-q.principal_curvatures), atol=1e-10)
    assert p.signature == -q.signature
    assert p.gaussian_curvature == pytest.approx((-1) ** 2 * q.gaussian_curvature, rel=1e-10)
    assert abs(p.gaussian_curvature) == pytest.approx(abs(q.gaussian_curvature), rel=1e-12)
    assert np.all(np.linalg.eigvalsh(p.first_form) > 0)


@given(st.integers(2, 4), st.floats(0.2, 5.0), st.data())
def test_sphere_curvature_is_radius_power(d, r, data):
    s = catalog.sphere(d, radius=r)
    i = data.draw(st.integers(0, len(s.charts) - 1))
    ch = s.charts[i]
    frac = np.array(data.draw(st.lists(st.floats(0.01, 0.99), min_size=d - 1, max_size=d - 1)))
    u = np.array(ch.lower) + frac * ch.widths
    assert float(gaussian_curvature_abs(ch, u)) == pytest.approx(r ** -(d - 1), rel=1e-8)


# ---------------------------------------------------------------- stationary points


def test_sphere_north_gives_poles():
    ss = stationary_points(catalog.sphere(3), None, [0, 0, 1])
    pos = sorted(tuple(np.round(p.point.position, 9)) for p in ss)
    assert pos == [(0.0, 0.0, -1.0), (0.0, 0.0, 1.0)]
    assert ss.status == "ok" and not ss.unique


def _same_angles(ss, expected, tol=1e-9):
    got = np.array([p.point.u[0] for p in ss])
    if len(got) != len(expected):
        return False
    gap = np.abs(np.angle(np.exp(1j * (got[:, None] - np.asarray(expected)[None, :]))))
    return bool(np.all(gap.min(axis=0) <= tol) and np.all(gap.min(axis=1) <= tol))


def test_figure1_horizontal_direction():
    # normal along e1 means a vertical tangent: a'(t) = -sin t (1 + 8 cos t) = 0
    r = math.acos(-1 / 8)
    assert _same_angles(stationary_points(catalog.figure1_curve(), None, [1, 0]), [0.0, math.pi, r, -r])


def test_figure1_vertical_direction():
    # normal along e2 means a horizontal tangent: b'(t) = a(t) = 0
    c = [(-1 + math.sqrt(33)) / 8, (-1 - math.sqrt(33)) / 8]
    expected = [math.acos(c[0]), -math.acos(c[0]), math.acos(c[1]), -math.acos(c[1])]
    assert _same_angles(stationary_points(catalog.figure1_curve(), None, [0, 1]), expected)


def test_cap_direction_outside_aperture_is_empty():
    cap = catalog.cap_graph(3, half_width=0.25)
    ss = stationary_points(cap, None, [1, 0, 0.2])
    assert len(ss) == 0 and ss.status == "empty"


def test_boundary_tangency_reported():
    cap = catalog.cap_graph(2, half_width=0.25)
    ss = stationary_points(cap, None, [0.25, math.sqrt(1 - 0.0625)])
    assert ss.status == "ok" and all(p.on_boundary for p in ss)
    sel = SubsurfaceSelection((((-0.2,), (0.2,)),))
    inner = stationary_points(cap, sel, [0.2 + 1e-7, math.sqrt(1 - 0.04)])
    assert inner.status in ("boundary", "empty") and len(inner) == 0
    assert inner.boundary_angle < 1e-3


@given(unit_vectors3)
def test_antipodal_closure_and_alignment(e):
    s = catalog.sphere(3, semi_axes=(1.0, 1.3, 0.8))
    a = stationary_points(s, None, e, seeds_per_axis=8)
    b = stationary_points(s, None, -e, seeds_per_axis=8)
    pa = sorted(tuple(np.round(p.point.position, 7)) for p in a)
    pb = sorted(tuple(np.round(p.point.position, 7)) for p in b)
    assert pa == pb and len(pa) == 2
    for p in a:
        assert abs(p.shape.normal @ e) >= 1 - 1e-9


def test_zero_direction_rejected():
    with pytest.raises(SurfaceError):
        stationary_points(catalog.circle(), None, [0, 0])


# ---------------------------------------------------------------- normal cones


@given(unit_vectors3)
def test_sphere_cone_is_everything(e):
    assert normal_cone_membership(catalog.sphere(3), None, e, seeds_per_axis=8)


def test_cap_membership_by_aperture():
    cap = catalog.spherical_cap(3, math.pi / 6)
    alpha = math.pi / 6
    for sign in (1, -1):
        ang = alpha + 0.1
        assert not normal_cone_membership(cap, None, [math.sin(ang), 0, sign * math.cos(ang)])
        ang = alpha - 0.1
        assert normal_cone_membership(cap, None, [math.sin(ang), 0, sign * math.cos(ang)])
    assert normal_cone_membership(cap, None, [0, 0, 1])
    with pytest.raises(SurfaceError):
        normal_cone_membership(cap, None, [0, 0, 0])


def test_membership_many_agrees_with_single():
    cap = catalog.cap_graph(2, half_width=0.4)
    angles = np.linspace(0, math.pi, 37)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    many, _ = membership_many(cap, None, dirs)
    single = [normal_cone_membership(cap, None, e) for e in dirs]
    assert list(many) == single


def test_sphere_cells_weights_cover_sphere():
    for d in (2, 3, 4):
        dirs, w = sphere_cells(d, math.pi / 16)
        assert np.allclose(np.linalg.norm(dirs, axis=1), 1)
        # midpoint solid angles add up to the sphere's area
        assert w.sum() == pytest.approx(oracles.sphere_area(d), rel=2e-2)


def test_coverage_examples():
    assert normal_cone_coverage(catalog.circle(), None, math.pi / 64).fraction == 1.0
    assert normal_cone_coverage(catalog.figure1_curve(), None, math.pi / 64).fraction == 1.0
    cap = normal_cone_coverage(catalog.spherical_cap(3, math.pi / 6), None, math.pi / 32)
    assert cap.fraction == pytest.approx(1 - math.cos(math.pi / 6), abs=0.01)
    assert len(cap.uncovered) == int((~cap.member).sum())


def test_coverage_resolution_bounds():
    with pytest.raises(SurfaceError):
        normal_cone_coverage(catalog.circle(), None, 1.0)


def test_coverage_is_monotone_under_union():
    cap = catalog.cap_graph(3, half_width=0.6)
    left = SubsurfaceSelection((((-0.5, -0.5), (0.0, 0.5)),))
    right = SubsurfaceSelection((((0.0, -0.5), (0.5, 0.5)),))
    res = math.pi / 24
    a = normal_cone_coverage(cap, left, res).fraction
    b = normal_cone_coverage(cap, right, res).fraction
    both = normal_cone_coverage(cap, [left, right], res).fraction
    assert both >= max(a, b)
