import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curveft import catalog, oracles
from curveft.oscillatory_fourier import (DegenerateStationaryPointError, FitError, asymptotic_compare,
                                         axis_integral, ball_average_energy, decay_phase_fit, ft_point, ft_scan,
                                         hemisphere_axis_profile, hemisphere_symmetry_check, scan_frequencies,
                                         sphere_axis_values, stationary_phase_eval)
from curveft.surface_model import QuadratureError, SurfaceError, total_mass

CIRCLE = catalog.circle()
SPHERE = catalog.sphere(3)
FIG1 = catalog.figure1_curve()
CAP2 = catalog.cap_graph(2, half_width=0.6)
CAP3 = catalog.cap_graph(3, half_width=0.6)


# ---------------------------------------------------------------- ft_point


def test_circle_zero_frequency_is_mass():
    assert ft_point(CIRCLE, None, [0, 0]).value == pytest.approx(2 * math.pi, abs=1e-12)


@pytest.mark.parametrize("q", [0.37, 1.0, 7.5, 33.3, 71.0, 100.0])
def test_circle_matches_bessel_oracle(q):
    xi = q * np.array([0.6, -0.8])
    assert abs(ft_point(CIRCLE, None, xi).value - oracles.circle_ft(xi)[0]) <= 1e-8


def test_sphere_half_frequency_vanishes():
    assert abs(ft_point(SPHERE, None, [0, 0.5, 0]).value) <= 1e-8


@pytest.mark.parametrize("xi", [[0.3, 0.1, 0.2], [3, -4, 12], [10, 20, -5]])
def test_sphere_closed_form(xi):
    assert abs(ft_point(SPHERE, None, xi).value - oracles.sphere_ft(np.array(xi))[0]) <= 1e-7


@pytest.mark.parametrize("surface,window", [
    (CIRCLE, None), (FIG1, None), (SPHERE, None), (catalog.hemisphere(3), None),
    (CAP2, catalog.bump_window(CAP2)), (CAP3, catalog.bump_window(CAP3, plateau=0.4)),
    (catalog.doubled(CIRCLE), None),
], ids=lambda x: getattr(x, "name", "window"))
def test_zero_frequency_equals_total_mass(surface, window):
    m = total_mass(surface, window)
    assert ft_point(surface, window, np.zeros(surface.d)).value == pytest.approx(m, rel=1e-10)


@given(st.floats(-40, 40), st.floats(-40, 40))
def test_conjugate_symmetry_figure1(a, b):
    xi = np.array([a, b])
    assert abs(ft_point(FIG1, None, xi).value - np.conj(ft_point(FIG1, None, -xi).value)) <= 1e-9


@given(st.floats(-30, 30), st.floats(-30, 30), st.floats(-30, 30))
def test_conjugate_symmetry_windowed_cap(a, b, c):
    w = catalog.bump_window(CAP3)
    xi = np.array([a, b, c])
    assert abs(ft_point(CAP3, w, xi).value - np.conj(ft_point(CAP3, w, -xi).value)) <= 1e-9


@pytest.mark.parametrize("surface,xi", [(FIG1, [13.0, -7.0]), (CIRCLE, [60.0, 11.0]), (SPHERE, [4.0, 9.0, -3.0])],
                         ids=["figure1", "circle", "sphere"])
def test_doubling_changes_value_within_estimate(surface, xi):
    base = ft_point(surface, None, xi)
    # a denser starting rule; the adaptive loop may already have doubled past the base one
    finer = ft_point(surface, None, xi, c_nyq=24.0)
    assert abs(finer.value - base.value) <= 10 * base.err_est
    assert finer.node_count >= base.node_count


def test_budget_exhaustion_raises():
    with pytest.raises(QuadratureError):
        ft_point(FIG1, None, [50.0, 0.0], max_nodes=64)


def test_wrong_dimension_rejected():
    with pytest.raises(SurfaceError):
        ft_point(CIRCLE, None, [1.0, 2.0, 3.0])


# ---------------------------------------------------------------- scans


def test_circle_ray_scan_matches_oracle():
    freqs = scan_frequencies({"ray": {"direction": [1, 0], "radii": list(range(1, 101))}}, 2)
    res = ft_scan(CIRCLE, None, freqs)
    assert len(res.samples) == 100 and not res.failures
    assert np.allclose(res.radii, np.arange(1, 101))
    assert np.max(np.abs(res.values - oracles.circle_ft(freqs))) <= 1e-8


def test_sphere_rotation_invariance():
    radii = np.linspace(1, 12, 6)
    a = ft_scan(SPHERE, None, scan_frequencies({"ray": {"direction": [1, 2, 2], "radii": radii.tolist()}}, 3))
    b = ft_scan(SPHERE, None, scan_frequencies({"ray": {"direction": [0, 0, -1], "radii": radii.tolist()}}, 3))
    assert np.max(np.abs(np.abs(a.values) - np.abs(b.values))) <= 1e-8


def test_empty_grid_gives_empty_scan():
    freqs = scan_frequencies({"grid": [[], [1.0]]}, 2)
    assert len(ft_scan(CIRCLE, None, freqs).samples) == 0
    assert len(ft_scan(CIRCLE, None, scan_frequencies({"points": []}, 2)).samples) == 0


def test_grid_ordering_is_row_major():
    freqs = scan_frequencies({"grid": [[0.0, 1.0], [2.0, 3.0, 4.0]]}, 2)
    assert freqs.tolist() == [[0, 2], [0, 3], [0, 4], [1, 2], [1, 3], [1, 4]]


def test_scan_records_failures_and_continues():
    freqs = np.array([[0.0, 0.0], [80.0, 0.0]])
    res = ft_scan(FIG1, None, freqs, max_nodes=2000)
    assert len(res.samples) == 2
    assert len(res.failures) == 1 and res.failures[0]["xi"] == [80.0, 0.0]


def test_scan_rejects_large_or_nonfinite():
    with pytest.raises(SurfaceError):
        ft_scan(CIRCLE, None, [[2000.0, 0.0]])
    with pytest.raises(SurfaceError):
        ft_scan(CIRCLE, None, [[np.nan, 0.0]])


def test_threaded_scan_is_identical():
    freqs = np.column_stack([np.linspace(0, 30, 12), np.linspace(5, -5, 12)])
    one = ft_scan(FIG1, None, freqs, threads=1).values
    many = ft_scan(FIG1, None, freqs, threads=3).values
    assert np.array_equal(one, many)


# ---------------------------------------------------------------- stationary phase


@given(st.floats(5.0, 40.0))
def test_sphere_leading_term_is_exact(r):
    sp = stationary_phase_eval(SPHERE, None, [0, 0, r])
    assert len(sp.terms) == 2 and not sp.unique
    assert abs(sp.value - 2 * math.sin(2 * math.pi * r) / r) <= 1e-12


def test_circle_leading_term_is_bessel_asymptotic():
    r = 20.1
    sp = stationary_phase_eval(CIRCLE, None, [r, 0])
    expected = 2 * r**-0.5 * math.cos(2 * math.pi * r - math.pi / 4)
    assert abs(sp.value - expected) <= 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_cap_axis_single_point_modulus(d):
    cap = catalog.cap_graph(d, half_width=0.6)
    w = catalog.bump_window(cap)
    r = 17.0
    xi = np.zeros(d)
    xi[-1] = r
    sp = stationary_phase_eval(cap, w, xi)
    assert len(sp.terms) == 1 and sp.unique
    t = sp.terms[0]
    psi = float(w.value(np.zeros(d - 1)))
    # unit sphere cap: |K| = 1 at the pole
    assert t.sqrt_abs_det == pytest.approx(1.0, abs=1e-12)
    assert t.window_value == pytest.approx(psi)
    assert abs(sp.value) == pytest.approx(psi * r ** (-(d - 1) / 2), rel=1e-12)


def test_outside_cone_gives_zero():
    w = catalog.bump_window(CAP3)
    sp = stationary_phase_eval(CAP3, w, [20.0, 0.0, 1.0])
    assert sp.terms == [] and sp.value == 0


def test_low_frequency_rejected():
    with pytest.raises(SurfaceError):
        stationary_phase_eval(CIRCLE, None, [1.0, 0.0])


def test_degenerate_point_raises():
    # K = 0 at the origin: the second principal curvature vanishes there
    flat = catalog.cap_graph(3, height=lambda w: 0.5 * w[..., 0] ** 2 + w[..., 1] ** 3)
    w = catalog.bump_window(flat)
    with pytest.raises(DegenerateStationaryPointError):
        stationary_phase_eval(flat, w, [0, 0, 10.0])


def test_boundary_point_on_open_surface_raises():
    cap = catalog.cap_graph(2, half_width=0.25)
    with pytest.raises(DegenerateStationaryPointError):
        stationary_phase_eval(cap, None, 10 * np.array([0.25, math.sqrt(1 - 0.0625)]))


def test_doubled_surface_halves_each_term():
    r = 12.3
    single = stationary_phase_eval(CIRCLE, None, [r, 0])
    double = stationary_phase_eval(catalog.doubled(CIRCLE), None, [r, 0])
    assert len(double.terms) == 2 * len(single.terms)
    assert all(t.multiplicity == 2 for t in double.terms)
    assert abs(double.value - single.value) <= 1e-12


# ---------------------------------------------------------------- asymptotic comparisons


def test_circle_remainder_slope():
    # the remainder oscillates like sin(2 pi q - pi/4) / q; sample its crests q = 3/8 + k/2
    k = np.unique(np.round(np.geomspace(20, 199, 12)))
    rep = asymptotic_compare(CIRCLE, None, [1, 0], 0.375 + k / 2)
    assert rep.slope == pytest.approx(-1.0, abs=0.2)


def test_sphere_remainder_is_quadrature_noise():
    rep = asymptotic_compare(SPHERE, None, [0, 0, 1], np.linspace(10.1, 20.1, 8))
    assert np.max(rep.deviation) <= 1e-6


@pytest.mark.parametrize("d", [2, 3])
def test_cap_remainder_slope(d):
    cap = catalog.cap_graph(d, half_width=0.6)
    e = np.zeros(d)
    e[-1] = 1
    rep = asymptotic_compare(cap, catalog.bump_window(cap), e, np.geomspace(10, 100, 10))
    assert rep.slope <= -0.8


def test_too_few_samples():
    with pytest.raises(FitError):
        asymptotic_compare(CIRCLE, None, [1, 0], np.linspace(10, 20, 5))


# ---------------------------------------------------------------- hemisphere


def test_hemisphere_d4_profile():
    xi = np.linspace(10, 100, 451) + 0.0037
    prof = hemisphere_axis_profile(4, xi)
    assert prof.slope == pytest.approx(-1.0, abs=0.05)
    assert prof.scaled_min > 0
    # endpoint oracle: xi |value| -> |S^2| / (2 pi) = 2, with an xi^-1/2 correction from t = 1
    scaled = xi * np.abs(prof.values)
    assert prof.leading_constant == pytest.approx(2.0)
    assert np.all(np.abs(scaled - 2.0) <= 1.0 / np.sqrt(xi))


def test_hemisphere_d3_closed_form():
    xi = np.array([0.3, 1.7, 12.25, 55.5])
    prof = hemisphere_axis_profile(3, xi)
    assert np.max(np.abs(prof.values - oracles.hemisphere_axis_d3(xi))) <= 1e-10


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_axis_integral_at_zero_is_wallis(d):
    assert axis_integral(d, 0.0).real == pytest.approx(oracles.wallis(d), rel=1e-13)


def test_sphere_axis_values_match_closed_form():
    xi = np.array([0.4, 3.3, 20.0])
    assert np.allclose(sphere_axis_values(3, xi), oracles.sphere_ft(xi[:, None]), atol=1e-12)


def test_hemisphere_chart_quadrature_matches_reduction():
    xi = 3.75
    direct = ft_point(catalog.hemisphere(3), None, [0, 0, xi]).value
    assert abs(direct - oracles.hemisphere_axis_d3(xi)) <= 1e-9


def test_symmetry_circle():
    rng = np.random.default_rng(5)
    v = rng.normal(size=(50, 2))
    v *= rng.uniform(0, 30, (50, 1)) / np.linalg.norm(v, axis=1, keepdims=True)
    assert hemisphere_symmetry_check(catalog.hemisphere(2), v) <= 1e-8


def test_symmetry_sphere_and_zero():
    rng = np.random.default_rng(6)
    v = rng.normal(size=(8, 3)) * 4
    h = catalog.hemisphere(3)
    assert hemisphere_symmetry_check(h, v) <= 1e-7
    assert hemisphere_symmetry_check(h, [[0, 0, 0]]) <= 1e-12


def test_symmetry_needs_parent():
    with pytest.raises(SurfaceError):
        hemisphere_symmetry_check(CIRCLE, [[1, 0]])


# ---------------------------------------------------------------- decay and phase fits


def test_fit_circle_oracle_values():
    r = np.arange(10.0137, 50, 0.05)
    fit = decay_phase_fit(r, oracles.circle_ft(r[:, None] * np.array([[1, 0]])), 2)
    assert fit.exponent == pytest.approx(-0.5, abs=0.05)
    assert fit.predicted_offset == pytest.approx(0.375)
    assert fit.max_zero_error <= 0.01


def test_fit_sphere_zeros_are_half_integers():
    r = np.arange(10.0137, 50, 0.1)
    fit = decay_phase_fit(r, oracles.sphere_ft(r[:, None] * np.array([[0, 0, 1]])), 3)
    assert fit.exponent == pytest.approx(-1.0, abs=0.05)
    assert np.allclose(fit.zeros * 2, np.round(fit.zeros * 2), atol=1e-3)


def test_fit_failures():
    r = np.linspace(10, 50, 100)
    with pytest.raises(FitError):
        decay_phase_fit(r, np.ones_like(r), 2)
    with pytest.raises(FitError):
        decay_phase_fit(r[:10], np.sin(r[:10]), 2)
    with pytest.raises(FitError):
        decay_phase_fit(np.linspace(30, 50, 100), np.sin(np.linspace(30, 50, 100)), 2)


# ---------------------------------------------------------------- decay laws


@pytest.mark.parametrize("surface", [CIRCLE, FIG1], ids=["circle", "figure1"])
def test_upper_bound_law_is_stable(surface):
    def scaled_max(n):
        r = np.linspace(10, 100, n)
        e = np.array([0.28, 0.96])
        return max(abs(ft_point(surface, None, x * e).value) * x**0.5 for x in r)

    coarse, fine = scaled_max(61), scaled_max(241)
    assert np.isfinite(fine) and fine <= 1.5 * coarse


def test_ball_average_lower_bound_circle():
    vals = [R * ball_average_energy(CIRCLE, None, [R, 0]) for R in (10, 20, 35, 50)]
    # 4 cos^2 / R averages to 2 / R
    assert min(vals) >= 1.5 and max(vals) <= 2.5


def test_ball_average_lower_bound_sphere():
    vals = [R**2 * ball_average_energy(SPHERE, None, [0, 0, R], n_radial=6, n_angular=8) for R in (10, 15)]
    assert min(vals) >= 1.5 and max(vals) <= 2.5
