"""Fourier transforms of (windowed) surface measures.

Convention: ``mu^(xi) = int exp(-2 pi i x . xi) dmu(x)``, with ``xi`` in
cycles per unit length.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gamma

from .differential_geometry import region_pieces, stationary_points
from .quadrature import interval_rule
from .surface_model import (N0, QuadratureError, Surface, SurfaceError, Window, integration_pieces,
                            nodes_per_axis, weighted_node_slabs)

C_NYQ = 6.0
MAX_NODES = 20_000_000


class DegenerateStationaryPointError(RuntimeError):
    """A stationary point is degenerate or sits on the boundary of the measure's support."""


class FitError(ValueError):
    """Not enough usable samples for a decay / phase fit."""


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CURVEFT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class FourierSample:
    xi: np.ndarray
    value: complex
    node_count: int
    err_est: float
    error: Optional[str] = None

    def row(self) -> list:
        return list(map(float, self.xi)) + [self.value.real, self.value.imag, abs(self.value),
                                            self.node_count, self.err_est]


def _piece_sum(x: np.ndarray, w: np.ndarray, xi: np.ndarray) -> complex:
    phase = (2.0 * math.pi) * (x @ xi)
    return complex(w @ np.cos(phase), -(w @ np.sin(phase)))


def _rule_sum(surface, window, p, n, xi):
    """Transform, absolute mass, largest |x| and node count of one rule, slab by slab."""
    total, mass, radius, count = 0j, 0.0, 0.0, 0
    for x, w in weighted_node_slabs(surface, window, p, n):
        total += _piece_sum(x, w, xi)
        mass += float(np.sum(np.abs(w)))
        if len(x):
            radius = max(radius, float(np.max(np.linalg.norm(x, axis=-1))))
        count += len(w)
    return total, mass, radius, count


def ft_point(surface: Surface, window: Optional[Window], xi, c_nyq: float = C_NYQ, n_min: int = N0,
             atol: Optional[float] = None, max_nodes: int = MAX_NODES) -> FourierSample:
    """Fourier transform of the (windowed) surface measure at one frequency.

    Each chart (or the window's support box) gets a tensor Gauss-Legendre
    rule with ``max(n_min, ceil(c_nyq (1 + |xi|) width))`` nodes per axis.
    The error estimate is the change from the half rule; the node count
    doubles until it is below ``atol`` (default ``1e-10`` times the mass of
    the piece) or the budget runs out.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (surface.d,):
        raise SurfaceError(f"xi must have {surface.d} components")
    xnorm = float(np.linalg.norm(xi))
    total, err_total, nodes = 0j, 0.0, 0
    for p, (_, lo, hi, _) in enumerate(integration_pieces(surface, window)):
        n = nodes_per_axis(np.subtract(hi, lo), xnorm, c_nyq, n_min)
        if np.prod(n, dtype=float) > max_nodes:
            raise QuadratureError(f"xi={xi.tolist()} needs {np.prod(n, dtype=float):.3g} nodes on piece {p}, "
                                  f"over the budget {max_nodes}", None, None)
        half = tuple(max(8, k // 2) for k in n)
        prev = _rule_sum(surface, window, p, half, xi)[0]
        while True:
            cur, mass, radius, count = _rule_sum(surface, window, p, n, xi)
            floor = 1e-14 * mass * (1.0 + 2 * math.pi * xnorm * radius)
            err = max(abs(cur - prev), floor)
            tol = 1e-10 * max(mass, 1e-300) if atol is None else atol
            # a change within a few roundoff floors is noise; refining cannot remove it
            if err <= max(tol, 8 * floor):
                break
            if np.prod(n) * 2 ** len(n) > max_nodes:
                raise QuadratureError(f"no convergence at xi={xi.tolist()} (err {err:.3g})", cur, err)
            prev, n = cur, tuple(2 * k for k in n)
        total += cur
        err_total += err
        nodes += count
    return FourierSample(xi, total, nodes, err_total)


def total_mass_ft(surface: Surface, window: Optional[Window] = None) -> float:
    return ft_point(surface, window, np.zeros(surface.d)).value.real


@dataclass
class ScanResult:
    samples: list
    failures: list = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples])

    @property
    def radii(self) -> np.ndarray:
        return np.array([np.linalg.norm(s.xi) for s in self.samples])


def scan_frequencies(spec: dict, d: int) -> np.ndarray:
    """Frequencies from a scan spec: ``ray``, ``grid`` or explicit ``points``."""
    if "ray" in spec:
        ray = spec["ray"]
        e = np.asarray(ray["direction"], dtype=float)
        if e.shape != (d,) or not np.linalg.norm(e) > 0:
            raise SurfaceError("ray direction must be a nonzero d-vector")
        e = e / np.linalg.norm(e)
        radii = ray["radii"]
        if isinstance(radii, dict):
            radii = np.linspace(radii["start"], radii["stop"], int(radii["num"]))
        return np.asarray(radii, dtype=float)[:, None] * e[None, :]
    if "grid" in spec:
        axes = [np.asarray(a, dtype=float) for a in spec["grid"]]
        if len(axes) != d:
            raise SurfaceError("grid needs one axis list per dimension")
        if any(len(a) == 0 for a in axes):
            return np.zeros((0, d))
        g = np.meshgrid(*axes, indexing="ij")
        return np.stack([a.ravel() for a in g], -1)
    if "points" in spec:
        pts = np.asarray(spec["points"], dtype=float).reshape(-1, d) if len(spec["points"]) else np.zeros((0, d))
        return pts
    raise SurfaceError("scan spec needs 'ray', 'grid' or 'points'")


def ft_scan(surface: Surface, window: Optional[Window], frequencies, max_norm: float = 1e3,
            threads: Optional[int] = None, **kw) -> ScanResult:
    """Evaluate the transform at many frequencies in the given order.

    Per-point failures are recorded and the scan continues.
    """
    freqs = np.atleast_2d(np.asarray(frequencies, dtype=float)) if len(frequencies) else np.zeros((0, surface.d))
    if np.any(~np.isfinite(freqs)) or (len(freqs) and np.max(np.linalg.norm(freqs, axis=-1)) > max_norm):
        raise SurfaceError(f"scan frequencies must be finite with |xi| <= {max_norm}")

    def one(xi):
        try:
            return ft_point(surface, window, xi, **kw)
        except QuadratureError as exc:
            return FourierSample(xi, complex(exc.value if exc.value is not None else np.nan),
                                 0, float(exc.err_est or np.inf), str(exc))

    threads = thread_count() if threads is None else threads
    if threads > 1 and len(freqs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            samples = list(pool.map(one, freqs))
    else:
        samples = [one(xi) for xi in freqs]
    failures = [{"xi": s.xi.tolist(), "error": s.error} for s in samples if s.error]
    return ScanResult(samples, failures)


# --------------------------------------------------------------------------- stationary phase


@dataclass(frozen=True)
class StationaryTerm:
    chart_index: int
    u: np.ndarray
    position: np.ndarray
    sqrt_abs_det: float
    signature: int
    window_value: float
    multiplicity: int
    term: complex


@dataclass(frozen=True)
class StationaryData:
    xi: np.ndarray
    terms: list
    value: complex

    @property
    def unique(self) -> bool:
        return len(self.terms) <= 1


def stationary_phase_eval(surface: Surface, window: Optional[Window], xi, xi_min: float = 5.0,
                          curvature_threshold: float = 1e-8, seeds_per_axis: int = 32) -> StationaryData:
    """Leading stationary-phase term summed over all points with normal ``+-xi/|xi|``.

    Each point contributes
    ``exp(-2 pi i p.xi) exp(-i pi s/4) |K|^(-1/2) psi(p) / m(p) |xi|^(-(d-1)/2)``,
    with ``K`` and the signature ``s`` taken w.r.t. the normal along ``+xi``.
    """
    xi = np.asarray(xi, dtype=float)
    r = float(np.linalg.norm(xi))
    if r < xi_min:
        raise SurfaceError(f"|xi| = {r:.3g} is below the asymptotic threshold {xi_min}")
    d = surface.d
    region = None if window is None else region_pieces(surface, window, superlevel=False)
    ss = stationary_points(surface, region, xi, seeds_per_axis=seeds_per_axis)
    if window is None and ss.status == "boundary":
        raise DegenerateStationaryPointError(
            f"direction {ss.direction.tolist()} is attained only on the surface boundary")
    terms = []
    for sp in ss:
        sd = sp.shape
        ci = sp.point.chart_index
        psi = 1.0 if window is None else float(window.value(sp.point.u))
        if window is None and sp.on_boundary:
            raise DegenerateStationaryPointError(
                f"stationary point on the boundary at chart {ci}, u={sp.point.u.tolist()}")
        if psi == 0.0:
            continue
        K = abs(sd.gaussian_curvature)
        if K < curvature_threshold:
            raise DegenerateStationaryPointError(
                f"degenerate stationary point at chart {ci}, u={sp.point.u.tolist()} (|K|={K:.3g})")
        m = int(surface.multiplicity(ci, sp.point.u[None, :])[0])
        phase = np.exp(-2j * math.pi * float(sp.point.position @ xi)) * np.exp(-1j * math.pi * sd.signature / 4)
        term = phase * K**-0.5 * psi / m * r ** (-(d - 1) / 2)
        terms.append(StationaryTerm(ci, sp.point.u, sp.point.position, math.sqrt(K), sd.signature, psi, m,
                                    complex(term)))
    _check_separation(terms, r)
    return StationaryData(xi, terms, complex(sum(t.term for t in terms)))


def _check_separation(terms, r: float, same_tol: float = 1e-7):
    # the leading term needs distinct points further apart than |xi|^(-1/2);
    # closer ones signal a nearby degenerate point (and Newton's slow convergence there)
    if len(terms) < 2:
        return
    pos = np.array([t.position for t in terms])
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    close = (dist > same_tol) & (dist < r**-0.5)
    if close.any():
        i, j = np.argwhere(close)[0]
        raise DegenerateStationaryPointError(
            f"stationary points {pos[i].tolist()} and {pos[j].tolist()} coalesce at |xi| = {r:.4g}")


def _loglog_fit(x, y):
    lx, ly = np.log(x), np.log(y)
    coef, res, *_ = np.polyfit(lx, ly, 1, full=True)
    resid = float(np.sqrt(res[0] / len(lx))) if len(res) else 0.0
    return float(coef[0]), float(coef[1]), resid


@dataclass
class DecayReport:
    radii: np.ndarray
    deviation: np.ndarray
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual,
                "max_deviation": float(np.max(self.deviation)) if len(self.deviation) else None}


def asymptotic_compare(surface: Surface, window: Optional[Window], direction, radii,
                       relative: bool = False, min_samples: int = 8) -> DecayReport:
    """Scaled deviation ``|ft - leading term| |xi|^((d-1)/2)`` along a ray and its log-log slope.

    The leading term itself decays like ``|xi|^(-(d-1)/2)``, so the scaled
    deviation falls like ``|xi|^-1``. With ``relative=True`` the deviation is
    divided by the modulus of the leading term instead (same slope for a
    single stationary point).
    """
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    d = surface.d
    rs, devs = [], []
    for r in np.asarray(radii, dtype=float):
        xi = r * e
        ft = ft_point(surface, window, xi).value
        sp = stationary_phase_eval(surface, window, xi).value
        dev = abs(ft - sp)
        dev = dev / abs(sp) if relative else dev * r ** ((d - 1) / 2)
        if np.isfinite(dev) and dev > 0:
            rs.append(r)
            devs.append(dev)
    if len(rs) < min_samples:
        raise FitError(f"only {len(rs)} usable samples (need {min_samples})")
    slope, icpt, resid = _loglog_fit(np.array(rs), np.array(devs))
    return DecayReport(np.array(rs), np.array(devs), slope, icpt, resid)


# --------------------------------------------------------------------------- axis profiles


def sphere_section_area(d: int) -> float:
    """Area of the unit sphere S^{d-2} (2 for d = 2)."""
    k = d - 1
    return 2 * math.pi ** (k / 2) / gamma(k / 2)


def axis_integral(d: int, xi_d: float, upper: float = math.pi / 2, c_nyq: float = C_NYQ,
                  atol: float = 1e-13) -> complex:
    """``int_0^upper exp(-2 pi i xi cos t) sin(t)^(d-2) dt`` by frequency-scaled GL with doubling."""
    n = max(N0, math.ceil(c_nyq * (1 + abs(xi_d)) * upper))
    prev = None
    for _ in range(12):
        t, w = interval_rule(0.0, upper, n)
        val = complex(np.sum(w * np.exp(-2j * math.pi * xi_d * np.cos(t)) * np.sin(t) ** (d - 2)))
        if prev is not None and abs(val - prev) <= atol:
            return val
        prev, n = val, 2 * n
    raise QuadratureError(f"axis integral did not converge at xi_d={xi_d}", val, abs(val - prev))


@dataclass
class AxisProfile:
    d: int
    xi: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residual: float
    scaled_min: float
    scaled_max: float
    leading_constant: float

    def to_dict(self) -> dict:
        return {"d": self.d, "slope": self.slope, "intercept": self.intercept, "residual": self.residual,
                "scaled_min": self.scaled_min, "scaled_max": self.scaled_max,
                "leading_constant": self.leading_constant}


def hemisphere_axis_profile(d: int, xis) -> AxisProfile:
    """``sigma_+^(0,...,0,xi_d)`` for the unit upper hemisphere, its slope and ``xi |value|`` range.

    ``leading_constant`` is ``|S^{d-2}| / (2 pi)``, the limit of
    ``xi_d |value|`` for d >= 4 from the equator endpoint.
    """
    if d < 2:
        raise SurfaceError("d must be at least 2")
    xis = np.asarray(xis, dtype=float)
    cd = sphere_section_area(d)
    vals = np.array([cd * axis_integral(d, x) for x in xis])
    mags = np.abs(vals)
    usable = (xis > 0) & (mags > 0)
    slope = icpt = resid = float("nan")
    if usable.sum() >= 2:
        slope, icpt, resid = _loglog_fit(xis[usable], mags[usable])
    scaled = xis[usable] * mags[usable]
    return AxisProfile(d, xis, vals, slope, icpt, resid,
                       float(scaled.min()) if scaled.size else float("nan"),
                       float(scaled.max()) if scaled.size else float("nan"), cd / (2 * math.pi))


def sphere_axis_values(d: int, xis) -> np.ndarray:
    """Transform of the whole unit sphere along the last axis, via the same 1-D integral on ``[0, pi]``."""
    cd = sphere_section_area(d)
    return np.array([cd * axis_integral(d, x, upper=math.pi) for x in np.asarray(xis, dtype=float)])


def hemisphere_symmetry_check(hemi: Surface, xis) -> float:
    """``max |2 Re ft(S_+) - ft(S)|`` over the given frequencies."""
    if hemi.parent is None:
        raise SurfaceError("surface has no parent; build it with catalog.hemisphere")
    worst = 0.0
    for xi in np.atleast_2d(np.asarray(xis, dtype=float)):
        half = ft_point(hemi, None, xi).value
        full = ft_point(hemi.parent, None, xi).value
        worst = max(worst, abs(2 * half.real - full))
    return worst


# --------------------------------------------------------------------------- decay / phase fit


@dataclass
class PhaseFit:
    exponent: float
    intercept: float
    residual: float
    zeros: np.ndarray
    offset: float
    predicted_offset: float
    max_zero_error: float

    def to_dict(self) -> dict:
        return {"slope": self.exponent, "intercept": self.intercept, "residual": self.residual,
                "zeros": self.zeros.tolist(), "offset": self.offset,
                "predicted_offset": self.predicted_offset, "max_zero_error": self.max_zero_error}


def decay_phase_fit(radii, values, d: int, min_samples: int = 16, min_zeros: int = 3) -> PhaseFit:
    """Envelope exponent and zero pattern of samples along a ray.

    Works on the real part. The envelope is fitted through parabola-refined
    local maxima of ``|Re value|``; zeros come from sign changes by linear
    interpolation and are compared with ``(d-1)/8 + 1/4 + k/2``.
    """
    r = np.asarray(radii, dtype=float)
    v = np.real(np.asarray(values))
    order = np.argsort(r)
    r, v = r[order], v[order]
    if len(r) < min_samples:
        raise FitError(f"need at least {min_samples} samples, got {len(r)}")
    if not r[0] > 0 or r[-1] < 2 * r[0]:
        raise FitError("samples must span at least a dyadic range r_max >= 2 r_min > 0")
    s = np.sign(v)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    zeros = r[idx] - v[idx] * (r[idx + 1] - r[idx]) / (v[idx + 1] - v[idx])
    if len(zeros) < min_zeros:
        raise FitError(f"only {len(zeros)} zero crossings")
    a = np.abs(v)
    peaks_r, peaks_a = [], []
    for j in range(1, len(a) - 1):
        if a[j] >= a[j - 1] and a[j] >= a[j + 1] and a[j] > 0:
            y0, y1, y2 = a[j - 1], a[j], a[j + 1]
            h = r[j + 1] - r[j]
            denom = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            shift = float(np.clip(shift, -0.5, 0.5))
            peaks_r.append(r[j] + shift * h)
            peaks_a.append(y1 - 0.25 * (y0 - y2) * shift)
    if len(peaks_r) < 2:
        raise FitError("not enough envelope peaks")
    expo, icpt, resid = _loglog_fit(np.array(peaks_r), np.array(peaks_a))
    predicted = ((d - 1) / 8 + 0.25) % 0.5
    ang = 4 * math.pi * zeros  # period 1/2 -> full turn
    offset = (math.atan2(np.mean(np.sin(ang)), np.mean(np.cos(ang))) / (4 * math.pi)) % 0.5
    dev = (zeros - predicted) % 0.5
    dev = np.minimum(dev, 0.5 - dev)
    return PhaseFit(expo, icpt, resid, zeros, offset, predicted, float(dev.max()))


# --------------------------------------------------------------------------- ball averages


def ball_average_energy(surface: Surface, window: Optional[Window], center, n_radial: int = 12,
                        n_angular: int = 16) -> float:
    """Mean of ``|mu^|^2`` over the unit ball around ``center`` (d = 2, 3)."""
    center = np.asarray(center, dtype=float)
    d = surface.d
    rr, wr = interval_rule(0.0, 1.0, n_radial)
    if d == 2:
        phi = 2 * math.pi * np.arange(n_angular) / n_angular
        dirs = np.stack([np.cos(phi), np.sin(phi)], -1)
        wd = np.full(n_angular, 2 * math.pi / n_angular)
    elif d == 3:
        ct, wt = interval_rule(-1.0, 1.0, max(4, n_angular // 2))
        phi = 2 * math.pi * np.arange(n_angular) / n_angular
        st = np.sqrt(1 - ct**2)
        dirs = np.stack([np.outer(st, np.cos(phi)).ravel(), np.outer(st, np.sin(phi)).ravel(),
                         np.repeat(ct, n_angular)], -1)
        wd = np.repeat(wt, n_angular) * (2 * math.pi / n_angular)
    else:
        raise SurfaceError("ball averages are implemented for d = 2, 3")
    total = 0.0
    for r, w in zip(rr, wr):
        for e, we in zip(dirs, wd):
            total += w * we * r ** (d - 1) * abs(ft_point(surface, window, center + r * e).value) ** 2
    volume = math.pi if d == 2 else 4 * math.pi / 3
    return total / volume
