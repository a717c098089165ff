"""End-to-end acceptance checks, runnable as a fast or full suite."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import catalog, oracles
from .differential_geometry import curvature_closed_form_revolution, gaussian_curvature_abs, normal_cone_coverage
from .frame_diagnostics import (FTCache, Spectrum, cone_frequencies, cone_lower_bound_check,
                                divergence_partial_sum, frame_bounds_estimate, generate_spectrum)
from .oscillatory_fourier import (asymptotic_compare, decay_phase_fit, ft_point, hemisphere_axis_profile,
                                  hemisphere_symmetry_check, sphere_axis_values)

SUITES = ("fast", "full")


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    tolerance: str
    measured: dict = field(default_factory=dict)

    def line(self) -> str:
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2} {self.name}: {shown} ({self.tolerance}; {self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _random_directions(rng, n, d):
    v = rng.normal(size=(n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def criterion_1(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    theta = (np.arange(256) + 0.5) * 2 * math.pi / 256
    worst = {}
    for d in (2, 3, 4):
        surf = catalog.revolution_surface(d)
        idx, u = catalog.revolution_coords(d, theta)
        k = np.empty(len(theta))
        for j in np.unique(idx):
            sel = idx == j
            k[sel] = gaussian_curvature_abs(surf.charts[j], u[sel])
        exact = curvature_closed_form_revolution(theta, d)
        worst[f"d{d}_rel_err"] = float(np.max(np.abs(k - exact) / exact))
    dt = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and dt <= 5.0
    return CriterionResult(1, "revolution-surface curvature", ok, dt, "rel err <= 1e-8, <= 5 s", worst)


def criterion_2(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    n = 100 if full else 25
    xis = np.linspace(0, 100, n)[:, None] * _random_directions(rng, n, 2)
    circ = catalog.circle()
    vals = np.array([ft_point(circ, None, x).value for x in xis])
    err = float(np.max(np.abs(vals - oracles.circle_ft(xis))))
    dt = time.perf_counter() - t0
    return CriterionResult(2, "circle FT vs 2 pi J0", err <= 1e-8 and dt <= 10.0, dt, "abs err <= 1e-8, <= 10 s",
                           {"max_abs_err": err, "samples": n})


def criterion_3(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    n = 40 if full else 10
    xis = np.linspace(0.5, 50, n)[:, None] * _random_directions(rng, n, 3)
    sph = catalog.sphere(3)
    vals = np.array([ft_point(sph, None, x).value for x in xis])
    err = float(np.max(np.abs(vals - oracles.sphere_ft(xis))))
    dt = time.perf_counter() - t0
    return CriterionResult(3, "sphere FT vs 2 sin(2 pi r)/r", err <= 1e-7 and dt <= 60.0, dt,
                           "abs err <= 1e-7, <= 60 s", {"max_abs_err": err, "samples": n})


def criterion_4(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    measured, ok = {}, True
    for d, surf, step in ((2, catalog.circle(), 0.05), (3, catalog.sphere(3), 0.1 if full else 0.2)):
        e = np.ones(d) / math.sqrt(d)
        # offset so that no sample lands exactly on a predicted zero
        radii = np.arange(10.0 + 0.0137, 50.0, step)
        vals = np.array([ft_point(surf, None, r * e).value for r in radii])
        fit = decay_phase_fit(radii, vals, d)
        measured[f"d{d}_exponent"] = fit.exponent
        measured[f"d{d}_zero_err"] = fit.max_zero_error
        ok &= abs(fit.exponent + (d - 1) / 2) <= 0.05 and fit.max_zero_error <= 0.02
    return CriterionResult(4, "decay exponent and zero offsets", ok, time.perf_counter() - t0,
                           "exponent -(d-1)/2 +- 0.05, zeros within 0.02", measured)


def criterion_5(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    n = 50 if full else 12
    measured = {}
    for d in (2, 3):
        xis = rng.uniform(0, 20, n)[:, None] * _random_directions(rng, n, d)
        measured[f"d{d}_max_dev"] = hemisphere_symmetry_check(catalog.hemisphere(d), xis)
    ok = max(measured.values()) <= 1e-7
    return CriterionResult(5, "hemisphere symmetry 2 Re = full", ok, time.perf_counter() - t0,
                           "deviation <= 1e-7", dict(measured, samples=n))


def criterion_6(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    xis = np.linspace(10.0, 100.0, 901 if full else 361) + 0.0037
    prof = hemisphere_axis_profile(4, xis)
    contrast = decay_phase_fit(xis, sphere_axis_values(4, xis), 4)
    measured = {"slope": prof.slope, "scaled_interval": [prof.scaled_min, prof.scaled_max],
                "sphere_exponent": contrast.exponent}
    ok = abs(prof.slope + 1) <= 0.05 and prof.scaled_min > 0 and abs(contrast.exponent + 1.5) <= 0.05
    # tie the one-dimensional reduction to the surface quadrature
    xi_check = 10.25 if full else 4.25
    direct = ft_point(catalog.hemisphere(4), None, [0, 0, 0, xi_check]).value
    reduced = hemisphere_axis_profile(4, [xi_check]).values[0]
    measured["chart_vs_reduction"] = abs(direct - reduced)
    ok &= measured["chart_vs_reduction"] <= 1e-7
    return CriterionResult(6, "hemisphere axis decay d=4", ok, time.perf_counter() - t0,
                           "slope -1 +- 0.05, xi|value| bounded below, sphere -1.5 +- 0.05", measured)


def _cap_setup(d):
    cap = catalog.cap_graph(d, half_width=0.6)
    return cap, catalog.bump_window(cap)


def criterion_7(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    measured, ok = {}, True
    for d in (2, 3):
        cap, win = _cap_setup(d)
        e = np.zeros(d)
        e[-1] = 1.0
        rep = asymptotic_compare(cap, win, e, np.geomspace(10, 100, 12 if full else 8))
        measured[f"d{d}_slope"] = rep.slope
        ok &= rep.slope <= -0.8
    return CriterionResult(7, "stationary phase remainder", ok, time.perf_counter() - t0, "slope <= -0.8", measured)


def criterion_8(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    measured, ok = {}, True
    for d in (2, 3):
        cap, win = _cap_setup(d)
        freqs = cone_frequencies(cap, win, np.geomspace(10, 100, 8 if full else 4), n_directions=8 if full else 4)
        rep = cone_lower_bound_check(cap, win, freqs, threshold=0.5)
        measured[f"d{d}_min_ratio"] = rep.min_ratio
        measured[f"d{d}_min_scaled"] = rep.min_scaled
        ok &= rep.passed
    return CriterionResult(8, "cone lower bound", ok, time.perf_counter() - t0,
                           "ratio to leading term >= 0.5", measured)


def criterion_9(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    z2 = generate_spectrum({"kind": "lattice_ball", "spacing": 1, "radius": 200, "exclude_zero": True}, 2)
    ratio = divergence_partial_sum(z2, 2, [100, 200]).ratios[100.0]
    ax = generate_spectrum({"kind": "axis_line", "step": 1, "radius": 1000}, 3)
    s = float(divergence_partial_sum(ax, 3, [1000]).sums[0])
    gap = abs(s - math.pi**2 / 3)
    exact = abs(s - oracles.axis_basel_sum(1000))
    ok = abs(ratio - 2) <= 0.1 and gap <= 2e-3 and exact <= 1e-12
    return CriterionResult(9, "divergence / convergence", ok, time.perf_counter() - t0,
                           "ratio 2 +- 0.1, |S - pi^2/3| <= 2e-3",
                           {"ratio_R100": ratio, "axis_gap": gap, "vs_exact_sum": exact})


SIZES = (8, 16, 32, 64)


def frame_trends(sizes=SIZES):
    """alpha_min over growing test grids for the cap and the cone-restricted circle."""
    cap = catalog.cap_graph(2, half_width=0.25)
    base = np.arange(-160, 161, dtype=float)
    lam = Spectrum(np.column_stack([base, np.zeros_like(base)]), {"kind": "base_lattice", "radius": 160})
    cache = FTCache(cap, None)
    cap_alpha = [frame_bounds_estimate(cap, None, lam, np.column_stack([2.0 * np.arange(-n // 2, n // 2),
                                                                       np.zeros(n)]), cache=cache).alpha_min
                 for n in sizes]
    circ = catalog.circle()
    cone = generate_spectrum({"kind": "cone_lattice", "axis": [0, 1], "half_angle": math.pi / 12,
                              "spacing": 1, "radius": 40}, 2)
    cache = FTCache(circ, None)
    circ_alpha = [frame_bounds_estimate(circ, None, cone, np.column_stack([np.arange(-n // 2, n // 2),
                                                                          np.zeros(n)]).astype(float),
                                        cache=cache).alpha_min for n in sizes]
    return cap_alpha, circ_alpha


def criterion_10(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    cap_alpha, circ_alpha = frame_trends()
    c = 0.5 * cap_alpha[0]
    drop = circ_alpha[0] / circ_alpha[-1]
    dt = time.perf_counter() - t0
    ok = min(cap_alpha) >= c and drop >= 10 and dt <= 300
    return CriterionResult(10, "frame-bound trends", ok, dt, "cap alpha_min >= c = alpha_min(8)/2, circle drop >= 10x",
                           {"c": c, "cap_alpha_min": cap_alpha, "circle_alpha_min": circ_alpha, "circle_drop": drop})


def criterion_11(full: bool) -> CriterionResult:
    t0 = time.perf_counter()
    fig = normal_cone_coverage(catalog.figure1_curve(), None, math.pi / 64).fraction
    cap = normal_cone_coverage(catalog.spherical_cap(3, math.pi / 6), None, math.pi / 64).fraction
    target = 1 - math.cos(math.pi / 6)
    ok = fig == 1.0 and abs(cap - target) <= 0.01
    return CriterionResult(11, "normal-cone coverage", ok, time.perf_counter() - t0,
                           "figure1 = 1, cap = 1 - cos(pi/6) +- 0.01",
                           {"figure1": fig, "cap": cap, "cap_target": target})


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


def run_suite(suite: str = "fast", only=None, echo=None) -> list:
    """Run the criteria; ``echo`` receives each result line as it finishes."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    results = []
    for i in sorted(only or CRITERIA):
        try:
            res = CRITERIA[i](suite == "full")
        except Exception as exc:  # a crash is a failed criterion, not a crashed suite
            res = CriterionResult(i, f"criterion {i}", False, 0.0, "raised", {"error": repr(exc)})
        results.append(res)
        if echo:
            echo(res.line())
    return results
