"""Charts, immersed surfaces, windows and the multiplicity-weighted surface measure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .quadrature import box_rule_slabs, ladder

N0 = 16


class SurfaceError(ValueError):
    """Invalid surface, chart, window or point."""


class ChartValidationError(SurfaceError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested tolerance within its node budget."""

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


@dataclass(frozen=True, eq=False)
class Chart:
    """A parameterized patch ``u -> chi(u)`` of a hypersurface in R^d.

    ``embed_fn`` maps parameter arrays of shape ``(..., d-1)`` to ``(..., d)``.
    ``jacobian_fn`` returns ``(..., d, d-1)`` and ``hessian_fn`` returns
    ``(..., d-1, d-1, d)``. Missing derivatives fall back to central
    differences with step ``h_fd`` times the domain width.
    """

    dim_ambient: int
    lower: tuple
    upper: tuple
    embed_fn: Callable
    jacobian_fn: Optional[Callable] = None
    hessian_fn: Optional[Callable] = None
    periodic: tuple = ()
    name: str = ""
    h_fd: float = 1e-5

    def __post_init__(self):
        if self.dim_ambient < 2:
            raise SurfaceError("ambient dimension must be at least 2")
        k = self.dim_ambient - 1
        lower = tuple(float(x) for x in np.atleast_1d(self.lower))
        upper = tuple(float(x) for x in np.atleast_1d(self.upper))
        if len(lower) != k or len(upper) != k:
            raise SurfaceError(f"domain box must have {k} axes")
        if any(hi <= lo for lo, hi in zip(lower, upper)):
            raise SurfaceError("domain box must have positive widths")
        periodic = tuple(bool(p) for p in self.periodic) or (False,) * k
        if len(periodic) != k:
            raise SurfaceError("periodic flags must match the parameter dimension")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "periodic", periodic)

    @property
    def dim_param(self) -> int:
        return self.dim_ambient - 1

    @property
    def widths(self) -> np.ndarray:
        return np.subtract(self.upper, self.lower)

    @property
    def derivative_mode(self) -> str:
        if self.jacobian_fn is not None and self.hessian_fn is not None:
            return "analytic"
        return "finite-difference"

    def embed(self, u) -> np.ndarray:
        return np.asarray(self.embed_fn(np.asarray(u, dtype=float)), dtype=float)

    def jacobian(self, u) -> np.ndarray:
        if self.jacobian_fn is None:
            return self.fd_jacobian(u)
        return np.asarray(self.jacobian_fn(np.asarray(u, dtype=float)), dtype=float)

    def hessian(self, u) -> np.ndarray:
        if self.hessian_fn is None:
            return self.fd_hessian(u)
        return np.asarray(self.hessian_fn(np.asarray(u, dtype=float)), dtype=float)

    def fd_jacobian(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        cols = []
        for a in range(self.dim_param):
            h = self.h_fd * self.widths[a]
            step = np.zeros(self.dim_param)
            step[a] = h
            cols.append((self.embed(u + step) - self.embed(u - step)) / (2 * h))
        return np.stack(cols, axis=-1)

    def fd_hessian(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        k = self.dim_param
        out = np.empty(u.shape[:-1] + (k, k, self.dim_ambient))
        if self.jacobian_fn is not None:
            for a in range(k):
                h = self.h_fd * self.widths[a]
                step = np.zeros(k)
                step[a] = h
                dj = (self.jacobian(u + step) - self.jacobian(u - step)) / (2 * h)
                out[..., a, :, :] = np.swapaxes(dj, -1, -2)
            return 0.5 * (out + np.swapaxes(out, -2, -3))
        # second differences of the embedding; step balances truncation and rounding
        hs = 1e-4 * self.widths
        f0 = self.embed(u)
        for a in range(k):
            ea = np.zeros(k)
            ea[a] = hs[a]
            out[..., a, a, :] = (self.embed(u + ea) - 2 * f0 + self.embed(u - ea)) / hs[a] ** 2
            for b in range(a + 1, k):
                eb = np.zeros(k)
                eb[b] = hs[b]
                val = (self.embed(u + ea + eb) - self.embed(u + ea - eb)
                       - self.embed(u - ea + eb) + self.embed(u - ea - eb)) / (4 * hs[a] * hs[b])
                out[..., a, b, :] = val
                out[..., b, a, :] = val
        return out

    def wrap(self, u) -> np.ndarray:
        """Map periodic coordinates back into ``[lower, upper)``."""
        u = np.array(u, dtype=float, copy=True)
        for a, per in enumerate(self.periodic):
            if per:
                lo, w = self.lower[a], self.widths[a]
                u[..., a] = lo + np.mod(u[..., a] - lo, w)
        return u

    def contains(self, u, tol: float = 0.0) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        slack = tol * self.widths
        ok = np.ones(u.shape[:-1], dtype=bool)
        for a in range(self.dim_param):
            if self.periodic[a]:
                continue
            ok &= (u[..., a] >= self.lower[a] - slack[a]) & (u[..., a] <= self.upper[a] + slack[a])
        return ok

    def sample_grid(self, samples_per_axis: int, lower=None, upper=None) -> np.ndarray:
        """Cell-centred sample points, shape ``(n**(d-1), d-1)``."""
        lower = self.lower if lower is None else lower
        upper = self.upper if upper is None else upper
        axes = [lo + (np.arange(samples_per_axis) + 0.5) * (hi - lo) / samples_per_axis
                for lo, hi in zip(lower, upper)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)


@dataclass(frozen=True)
class Overlap:
    """Declares that points of chart ``chart`` satisfying ``contains`` also lie on chart ``other``."""

    chart: int
    other: int
    contains: Callable = field(default=lambda u: np.ones(np.shape(u)[:-1], dtype=bool))


@dataclass(frozen=True, eq=False)
class Surface:
    charts: tuple
    name: str = ""
    overlap_policy: str = "disjoint"
    overlaps: tuple = ()
    closed: bool = False
    parent: Optional["Surface"] = None
    spec: Optional[dict] = None

    def __post_init__(self):
        charts = tuple(self.charts)
        if not charts:
            raise SurfaceError("a surface needs at least one chart")
        if len({c.dim_ambient for c in charts}) != 1:
            raise SurfaceError("all charts must share the ambient dimension")
        if self.overlap_policy not in ("disjoint", "declared"):
            raise SurfaceError(f"unknown overlap policy {self.overlap_policy!r}")
        if self.overlap_policy == "disjoint" and self.overlaps:
            raise SurfaceError("overlaps given under the disjoint policy")
        for ov in self.overlaps:
            if not (0 <= ov.chart < len(charts) and 0 <= ov.other < len(charts)) or ov.chart == ov.other:
                raise SurfaceError(f"bad overlap declaration {ov}")
        object.__setattr__(self, "charts", charts)
        object.__setattr__(self, "overlaps", tuple(self.overlaps))

    @property
    def d(self) -> int:
        return self.charts[0].dim_ambient

    def multiplicity(self, chart_index: int, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        m = np.ones(u.shape[:-1], dtype=int)
        if self.overlap_policy == "declared":
            for ov in self.overlaps:
                if ov.chart == chart_index:
                    m = m + np.asarray(ov.contains(u), dtype=bool)
        return m


def full_overlap(i: int, j: int) -> tuple:
    """Overlap declarations for two charts with identical images."""
    return (Overlap(i, j), Overlap(j, i))


@dataclass(frozen=True)
class SurfacePoint:
    chart_index: int
    u: np.ndarray
    position: np.ndarray
    area_element: float


def area_element(chart: Chart, u) -> np.ndarray:
    jac = chart.jacobian(u)
    gram = np.swapaxes(jac, -1, -2) @ jac
    return np.sqrt(np.abs(np.linalg.det(gram)))


def surface_point(surface: Surface, chart_index: int, u) -> SurfacePoint:
    chart = surface.charts[chart_index]
    u = np.asarray(u, dtype=float).reshape(chart.dim_param)
    if not chart.contains(u, tol=1e-12):
        raise SurfaceError(f"parameter {u} outside the domain of chart {chart_index}")
    return SurfacePoint(chart_index, u, chart.embed(u), float(area_element(chart, u)))


def surface_measure_weight(surface: Surface, point: SurfacePoint) -> float:
    """Density of the surface measure at ``point`` w.r.t. parameter Lebesgue measure."""
    chart = surface.charts[point.chart_index]
    if not chart.contains(point.u, tol=1e-12):
        raise SurfaceError("point outside its chart domain")
    m = int(surface.multiplicity(point.chart_index, point.u[None, :])[0])
    return point.area_element / m


@dataclass(frozen=True)
class SubsurfaceSelection:
    """Per-chart inner boxes ``V_i``; ``None`` marks an empty selection."""

    boxes: tuple
    margin: float = 1e-3

    def validate(self, surface: Surface) -> None:
        if self.margin <= 0:
            raise SurfaceError("margin must be positive")
        if len(self.boxes) != len(surface.charts):
            raise SurfaceError("one box (or None) per chart required")
        for i, box in enumerate(self.boxes):
            if box is None:
                continue
            chart = surface.charts[i]
            lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
            for a in range(chart.dim_param):
                if chart.periodic[a]:
                    continue
                if lo[a] < chart.lower[a] + self.margin or hi[a] > chart.upper[a] - self.margin:
                    raise SurfaceError(f"box on chart {i} is not compactly contained (axis {a})")
                if hi[a] <= lo[a]:
                    raise SurfaceError(f"empty box on chart {i}")


def _smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        g = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return f / (f + g)


def _smooth_step_deriv(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    xs = np.where(inside, x, 0.5)
    f = np.exp(-1.0 / xs)
    g = np.exp(-1.0 / (1.0 - xs))
    df = f / xs**2
    dg = -g / (1.0 - xs) ** 2
    val = (df * (f + g) - f * (df + dg)) / (f + g) ** 2
    return np.where(inside, val, 0.0)


@dataclass(frozen=True, eq=False)
class Window:
    """Smooth compactly supported product bump on one chart.

    Each axis factor equals 1 on the central ``plateau`` fraction of the
    half-width and falls smoothly to 0 at the support edge. ``floor`` is the
    superlevel used when restricting normal cones.
    """

    chart_index: int
    support_lower: tuple
    support_upper: tuple
    plateau: float = 0.0
    floor: float = 0.5
    amplitude: float = 1.0

    def __post_init__(self):
        lo = tuple(float(x) for x in np.atleast_1d(self.support_lower))
        hi = tuple(float(x) for x in np.atleast_1d(self.support_upper))
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise SurfaceError("window support box must have positive widths")
        if not 0.0 <= self.plateau < 1.0:
            raise SurfaceError("plateau fraction must lie in [0, 1)")
        if not 0.0 < self.floor <= 1.0:
            raise SurfaceError("floor must lie in (0, 1]")
        if self.amplitude <= 0:
            raise SurfaceError("amplitude must be positive")
        object.__setattr__(self, "support_lower", lo)
        object.__setattr__(self, "support_upper", hi)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.support_lower) + np.asarray(self.support_upper))

    @property
    def half_widths(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.support_upper) - np.asarray(self.support_lower))

    def breakpoints(self) -> list:
        c, hw = self.center, self.half_widths
        if self.plateau == 0.0:
            return [(c[a],) for a in range(len(c))]
        return [(c[a] - self.plateau * hw[a], c[a] + self.plateau * hw[a]) for a in range(len(c))]

    def _factors(self, u):
        t = (np.asarray(u, dtype=float) - self.center) / self.half_widths
        r = (1.0 - np.abs(t)) / (1.0 - self.plateau)
        return t, r

    def value(self, u) -> np.ndarray:
        _, r = self._factors(u)
        return self.amplitude * np.prod(_smooth_step(r), axis=-1)

    def gradient(self, u) -> np.ndarray:
        t, r = self._factors(u)
        s = _smooth_step(r)
        ds = _smooth_step_deriv(r) * (-np.sign(t)) / ((1.0 - self.plateau) * self.half_widths)
        k = s.shape[-1]
        grads = []
        for a in range(k):
            others = np.prod(np.delete(s, a, axis=-1), axis=-1) if k > 1 else 1.0
            grads.append(ds[..., a] * others)
        return self.amplitude * np.stack(grads, axis=-1)

    def validate(self, surface: Surface) -> None:
        if not 0 <= self.chart_index < len(surface.charts):
            raise SurfaceError("window chart index out of range")
        chart = surface.charts[self.chart_index]
        if len(self.support_lower) != chart.dim_param:
            raise SurfaceError("window support box has the wrong dimension")
        for a in range(chart.dim_param):
            if chart.periodic[a]:
                continue
            if self.support_lower[a] < chart.lower[a] or self.support_upper[a] > chart.upper[a]:
                raise SurfaceError("window support leaves the chart domain")


# --------------------------------------------------------------------------- quadrature


def nodes_per_axis(width, xi_norm: float, c_nyq: float = 6.0, n_min: int = N0) -> tuple:
    return tuple(ladder(max(n_min, math.ceil(c_nyq * (1.0 + xi_norm) * w)), n_min)
                 for w in np.atleast_1d(width))


def integration_pieces(surface: Surface, window: Optional[Window] = None):
    """(chart_index, lower, upper, breakpoints) boxes carrying the measure."""
    if window is None:
        return [(i, c.lower, c.upper, None) for i, c in enumerate(surface.charts)]
    window.validate(surface)
    return [(window.chart_index, window.support_lower, window.support_upper, window.breakpoints())]


CACHE_NODES = 1 << 21


def _weigh(surface: Surface, window: Optional[Window], i: int, u: np.ndarray, w: np.ndarray):
    chart = surface.charts[i]
    dens = area_element(chart, u) / surface.multiplicity(i, u)
    if window is not None:
        dens = dens * window.value(u)
    x = chart.embed(u)
    keep = dens != 0.0
    return np.ascontiguousarray(x[keep]), (w * dens)[keep]


def _slabs(surface: Surface, window: Optional[Window], piece: int, n: tuple):
    i, lo, hi, bps = integration_pieces(surface, window)[piece]
    for u, w in box_rule_slabs(lo, hi, n, bps):
        yield _weigh(surface, window, i, u, w)


@lru_cache(maxsize=24)
def _weighted_nodes(surface: Surface, window: Optional[Window], piece: int, n: tuple):
    parts = list(_slabs(surface, window, piece, n))
    x = np.concatenate([p[0] for p in parts])
    wt = np.concatenate([p[1] for p in parts])
    x.setflags(write=False)
    wt.setflags(write=False)
    return x, wt


def weighted_nodes(surface: Surface, window: Optional[Window], piece: int, n: tuple):
    """Positions ``(N, d)`` and measure weights ``(N,)`` of a tensor GL rule."""
    return _weighted_nodes(surface, window, piece, tuple(int(k) for k in n))


def weighted_node_slabs(surface: Surface, window: Optional[Window], piece: int, n: tuple):
    """``weighted_nodes`` in pieces of bounded size; small rules come whole from the cache."""
    n = tuple(int(k) for k in n)
    if np.prod(n, dtype=float) <= CACHE_NODES:
        yield _weighted_nodes(surface, window, piece, n)
    else:
        yield from _slabs(surface, window, piece, n)


def _slab_mass(surface, window, p, n) -> float:
    return math.fsum(float(np.sum(w)) for _, w in weighted_node_slabs(surface, window, p, n))


def total_mass(surface: Surface, window: Optional[Window] = None, rtol: float = 1e-12,
               max_nodes: int = 30_000_000) -> float:
    """Total (windowed) surface measure by GL quadrature with node doubling."""
    total = 0.0
    for p, (_, lo, hi, _) in enumerate(integration_pieces(surface, window)):
        n = nodes_per_axis(np.subtract(hi, lo), 0.0)
        prev = _slab_mass(surface, window, p, tuple(max(8, k // 2) for k in n))
        while True:
            cur = _slab_mass(surface, window, p, n)
            if abs(cur - prev) <= max(rtol * abs(cur), 1e-300):
                break
            if np.prod(n) * 2 ** len(n) > max_nodes:
                raise QuadratureError(f"total mass did not converge on piece {p}", cur, abs(cur - prev))
            prev, n = cur, tuple(2 * k for k in n)
        total += cur
    return total


# --------------------------------------------------------------------------- validation


@dataclass
class ChartReport:
    passed: bool
    min_singular_value: float
    min_abs_curvature: float
    max_abs_curvature: float
    samples: int
    offending_point: Optional[list] = None
    reason: str = ""

    def raise_if_failed(self):
        if not self.passed:
            raise ChartValidationError(self.reason, self.offending_point)

    def to_dict(self) -> dict:
        return dict(passed=self.passed, min_singular_value=self.min_singular_value,
                    min_abs_curvature=self.min_abs_curvature, max_abs_curvature=self.max_abs_curvature,
                    samples=self.samples, offending_point=self.offending_point, reason=self.reason)


def validate_chart(chart: Chart, samples_per_axis: int = 64, sv_threshold: float = 1e-8,
                   curvature_threshold: float = 1e-8) -> ChartReport:
    """Check immersion and nonvanishing Gaussian curvature on a cell-centred grid."""
    from .differential_geometry import gaussian_curvature_abs

    if samples_per_axis < 2:
        raise SurfaceError("samples_per_axis must be at least 2")
    u = chart.sample_grid(samples_per_axis)
    sv = np.linalg.svd(chart.jacobian(u), compute_uv=False).min(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        kabs = gaussian_curvature_abs(chart, u)
    kabs = np.where(np.isfinite(kabs), kabs, 0.0)
    report = ChartReport(True, float(sv.min()), float(kabs.min()), float(kabs.max()), len(u))
    if sv.min() <= sv_threshold:
        j = int(np.argmin(sv))
        report.passed, report.offending_point = False, u[j].tolist()
        report.reason = f"Jacobian rank-deficient at u={u[j].tolist()} (sigma_min={sv[j]:.3g})"
    elif kabs.min() <= curvature_threshold:
        j = int(np.argmin(kabs))
        report.passed, report.offending_point = False, u[j].tolist()
        report.reason = f"Gaussian curvature vanishes at u={u[j].tolist()} (|K|={kabs[j]:.3g})"
    return report


def validate_surface(surface: Surface, samples_per_axis: int = 64, **thresholds) -> list:
    return [validate_chart(c, samples_per_axis, **thresholds) for c in surface.charts]
