"""Spectra, partial sums, translated energies and finite frame-bound estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .differential_geometry import _normal_samples, membership_many
from .oscillatory_fourier import ft_point, stationary_phase_eval
from .surface_model import Surface, SurfaceError, Window

MAX_POINTS = 10_000_000
MAX_H = 256


class SpectrumError(ValueError):
    pass


class FrameError(RuntimeError):
    """Raised when the Gram matrix is too ill-conditioned to trust."""

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


@dataclass(frozen=True)
class Spectrum:
    points: np.ndarray
    generator: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def contains_zero(self) -> bool:
        return bool(np.any(np.all(self.points == 0, axis=1)))

    def without_zero(self) -> "Spectrum":
        keep = ~np.all(self.points == 0, axis=1)
        return Spectrum(self.points[keep], dict(self.generator, exclude_zero=True))

    def shifted(self, v) -> "Spectrum":
        return Spectrum(self.points + np.asarray(v, dtype=float), dict(self.generator, shift=list(map(float, v))))


def _sort_points(pts: np.ndarray) -> np.ndarray:
    if len(pts) == 0:
        return pts
    norms = np.round(np.linalg.norm(pts, axis=1), 12)
    keys = [pts[:, j] for j in range(pts.shape[1] - 1, -1, -1)] + [norms]
    return pts[np.lexsort(keys)]


def _lattice_ball(d: int, spacing: float, radius: float) -> np.ndarray:
    m = int(math.floor(radius / spacing + 1e-12))
    est = (2 * m + 1) ** d
    vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * (radius / spacing) ** d
    if vol > MAX_POINTS or est > 50 * MAX_POINTS:
        raise SpectrumError(f"about {vol:.3g} points; refusing more than {MAX_POINTS}")
    ks = np.arange(-m, m + 1)
    # build row by row over the first axis to bound memory
    out = []
    for first in ks:
        rest = np.stack(np.meshgrid(*([ks] * (d - 1)), indexing="ij"), -1).reshape(-1, d - 1) if d > 1 else \
            np.zeros((1, 0), dtype=int)
        pts = np.column_stack([np.full(len(rest), first), rest]) * spacing
        out.append(pts[np.linalg.norm(pts, axis=1) <= radius * (1 + 1e-12)])
    return np.concatenate(out).astype(float)


def generate_spectrum(spec: dict, d: Optional[int] = None) -> Spectrum:
    """Build a spectrum from ``{"kind": ..., ...}``.

    Kinds: ``explicit`` (``points``), ``lattice_ball`` (``spacing``,
    ``radius``), ``axis_line`` (``step``, ``radius``, optional ``axis``),
    ``cone_lattice`` (``axis``, ``half_angle``, ``spacing``, ``radius``).
    ``exclude_zero`` drops the origin. Points come sorted by norm, then
    lexicographically.
    """
    spec = dict(spec)
    kind = spec.get("kind")
    d = int(spec.get("d", d or 0))
    if kind == "explicit":
        pts = np.asarray(spec["points"], dtype=float)
        if pts.size == 0:
            pts = np.zeros((0, d))
        if pts.ndim != 2 or not np.all(np.isfinite(pts)):
            raise SpectrumError("explicit points must be a finite (n, d) array")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise SpectrumError("explicit points must be distinct")
        d = pts.shape[1]
    else:
        if d < 1:
            raise SpectrumError("dimension d is required")
        if kind == "lattice_ball":
            spacing, radius = float(spec["spacing"]), float(spec["radius"])
            if spacing <= 0 or radius <= 0:
                raise SpectrumError("spacing and radius must be positive")
            pts = _lattice_ball(d, spacing, radius)
        elif kind == "axis_line":
            step, radius = float(spec["step"]), float(spec["radius"])
            if step <= 0 or radius <= 0:
                raise SpectrumError("step and radius must be positive")
            n = int(math.floor(radius / step + 1e-12))
            if 2 * n + 1 > MAX_POINTS:
                raise SpectrumError(f"{2 * n + 1} points; refusing more than {MAX_POINTS}")
            axis = np.zeros(d)
            axis[int(spec.get("axis", d - 1))] = 1.0
            pts = np.arange(-n, n + 1)[:, None] * step * axis[None, :]
        elif kind == "cone_lattice":
            spacing, radius = float(spec["spacing"]), float(spec["radius"])
            half = float(spec["half_angle"])
            if spacing <= 0 or radius <= 0 or not 0 <= half <= math.pi / 2:
                raise SpectrumError("need spacing, radius > 0 and half_angle in [0, pi/2]")
            axis = np.asarray(spec["axis"], dtype=float)
            if axis.shape != (d,) or not np.linalg.norm(axis) > 0:
                raise SpectrumError("axis must be a nonzero d-vector")
            axis = axis / np.linalg.norm(axis)
            pts = _lattice_ball(d, spacing, radius)
            norms = np.linalg.norm(pts, axis=1)
            cosang = np.abs(pts @ axis) / np.where(norms > 0, norms, 1.0)
            ang = np.arccos(np.clip(cosang, 0.0, 1.0))
            # the double cone |angle(x, +-axis)| <= half, with the origin
            pts = pts[(norms == 0) | (ang <= half + 1e-12)]
        else:
            raise SpectrumError(f"unknown spectrum kind {kind!r}")
    if spec.get("exclude_zero"):
        pts = pts[~np.all(pts == 0, axis=1)]
    return Spectrum(_sort_points(pts + 0.0), spec)


@dataclass
class PartialSums:
    radii: np.ndarray
    sums: np.ndarray
    ratios: dict

    def to_dict(self) -> dict:
        return {"radii": self.radii.tolist(), "sums": self.sums.tolist(),
                "ratios": {str(k): v for k, v in self.ratios.items()}}


def divergence_partial_sum(spectrum: Spectrum, d: int, radii) -> PartialSums:
    """``S(R) = sum over 0 < |lambda| <= R of |lambda|^-(d-1)``, plus ``S(2R)/S(R)`` where both radii are given."""
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise SpectrumError("radii must be increasing")
    norms = np.linalg.norm(spectrum.points, axis=1)
    norms = np.sort(norms[norms > 0])
    terms = norms ** -(d - 1.0)
    # sum small terms first for accuracy
    csum = np.concatenate([[0.0], np.cumsum(terms)])
    idx = np.searchsorted(norms, radii * (1 + 1e-12), side="right")
    sums = np.array([math.fsum(terms[:k]) for k in idx]) if len(radii) <= 64 else csum[idx]
    ratios = {}
    for r, s in zip(radii, sums):
        hit = np.flatnonzero(np.isclose(radii, 2 * r))
        if len(hit) and s > 0:
            ratios[float(r)] = float(sums[hit[0]] / s)
    return PartialSums(radii, sums, ratios)


class FTCache:
    """Memo of ft_point values keyed by the rounded frequency."""

    def __init__(self, surface: Surface, window: Optional[Window], **kw):
        self.surface, self.window, self.kw = surface, window, kw
        self.values: dict = {}

    def __call__(self, xis) -> np.ndarray:
        xis = np.atleast_2d(np.asarray(xis, dtype=float))
        keys = [tuple(np.round(x, 12) + 0.0) for x in xis]
        for k in dict.fromkeys(keys):
            if k not in self.values:
                self.values[k] = ft_point(self.surface, self.window, np.array(k), **self.kw).value
        return np.array([self.values[k] for k in keys], dtype=complex)


@dataclass
class EnergyScan:
    xi: np.ndarray
    energy: np.ndarray

    @property
    def min(self) -> float:
        return float(self.energy.min()) if len(self.energy) else 0.0

    @property
    def max(self) -> float:
        return float(self.energy.max()) if len(self.energy) else 0.0


def energy_scan(surface: Surface, window: Optional[Window], spectrum: Spectrum, xis,
                cache: Optional[FTCache] = None, budget: int = 2_000_000) -> EnergyScan:
    """Translated energy ``E(xi) = sum_lambda |mu^(lambda - xi)|^2`` on a frequency grid."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if len(xis) * len(spectrum) > budget:
        raise SpectrumError(f"{len(xis) * len(spectrum)} evaluations exceed the budget {budget}")
    cache = cache or FTCache(surface, window)
    out = np.zeros(len(xis))
    for j, xi in enumerate(xis):
        if len(spectrum):
            out[j] = float(np.sum(np.abs(cache(spectrum.points - xi)) ** 2))
    return EnergyScan(xis, out)


@dataclass
class ConePartition:
    inside: Spectrum
    outside: Spectrum
    inside_strict: int
    nearest_angle: np.ndarray


def cone_filter(spectrum: Spectrum, surface: Surface, region=None, angular_tol: float = 1e-3) -> ConePartition:
    """Split a spectrum into points inside and outside the normal cone of ``region``.

    The origin counts as inside. ``inside_strict`` counts points whose
    nearest normal is within 1e-9 rad.
    """
    pts = spectrum.points
    norms = np.linalg.norm(pts, axis=1)
    nz = norms > 0
    member = np.ones(len(pts), dtype=bool)
    nearest = np.zeros(len(pts))
    if nz.any():
        m, a = membership_many(surface, region, pts[nz], angular_tol=angular_tol)
        member[nz], nearest[nz] = m, a
    strict = int(np.sum(nearest <= 1e-9))
    return ConePartition(Spectrum(pts[member], spectrum.generator), Spectrum(pts[~member], spectrum.generator),
                         strict, nearest)


def cone_frequencies(surface: Surface, window: Window, radii, n_directions: int = 16) -> np.ndarray:
    """Frequencies ``r n`` with ``n`` a normal at points of ``{psi >= floor}``, sampled evenly."""
    normals = np.concatenate([row[3] for row in _normal_samples(surface, window, 64)])
    pick = np.linspace(0, len(normals) - 1, min(n_directions, len(normals))).round().astype(int)
    dirs = normals[np.unique(pick)]
    radii = np.asarray(radii, dtype=float)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, surface.d)


@dataclass
class LowerBoundReport:
    frequencies: np.ndarray
    scaled_energy: np.ndarray
    predicted: np.ndarray
    ratio: np.ndarray
    threshold: float

    @property
    def min_scaled(self) -> float:
        return float(self.scaled_energy.min())

    @property
    def min_ratio(self) -> float:
        return float(self.ratio.min())

    @property
    def passed(self) -> bool:
        return bool(self.min_ratio >= self.threshold)

    def to_dict(self) -> dict:
        return {"samples": len(self.frequencies), "min_scaled_energy": self.min_scaled,
                "min_ratio": self.min_ratio, "threshold": self.threshold, "passed": self.passed}


def cone_lower_bound_check(surface: Surface, window: Window, frequencies, threshold: float = 0.5,
                           xi_min: float = 5.0) -> LowerBoundReport:
    """``|psi dsigma^(lambda)|^2 |lambda|^(d-1)`` against the stationary-phase prediction.

    The prediction is ``|leading term|^2 |lambda|^(d-1)``; the check passes
    if every ratio is at least ``threshold``.
    """
    freqs = np.atleast_2d(np.asarray(frequencies, dtype=float))
    d = surface.d
    scaled, pred = [], []
    for lam in freqs:
        r = float(np.linalg.norm(lam))
        if r < xi_min:
            raise SurfaceError(f"|lambda| = {r:.3g} below {xi_min}")
        sp = stationary_phase_eval(surface, window, lam, xi_min=xi_min)
        if not sp.terms:
            raise SurfaceError(f"lambda = {lam.tolist()} is outside the normal cone of the window")
        ft = ft_point(surface, window, lam).value
        scaled.append(abs(ft) ** 2 * r ** (d - 1))
        pred.append(abs(sp.value) ** 2 * r ** (d - 1))
    scaled, pred = np.array(scaled), np.array(pred)
    return LowerBoundReport(freqs, scaled, pred, scaled / pred, threshold)


@dataclass
class FrameEstimate:
    H: np.ndarray
    lambda_size: int
    A: np.ndarray
    G: np.ndarray
    alpha_min: float
    alpha_max: float
    cond_G: float

    def to_dict(self) -> dict:
        return {"H_size": int(len(self.H)), "lambda_size": int(self.lambda_size),
                "alpha_min": self.alpha_min, "alpha_max": self.alpha_max, "cond_G": self.cond_G}


def frame_bounds_estimate(surface: Surface, window: Optional[Window], spectrum: Spectrum, H,
                          cache: Optional[FTCache] = None, max_cond: float = 1e12) -> FrameEstimate:
    """Extreme frame ratios on ``span{exp(2 pi i eta . x) : eta in H}``.

    With ``f = sum_eta c_eta e_eta`` one has
    ``sum_lambda |f dmu^(lambda)|^2 = c^T A conj(c)`` and
    ``||f||^2 = c^T G conj(c)`` where
    ``A[eta, eta'] = sum_lambda mu^(lambda - eta) conj(mu^(lambda - eta'))`` and
    ``G[eta, eta'] = mu^(eta' - eta)``. The extreme generalized
    eigenvalues of ``(A, G)`` are the best frame constants on that span.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if len(H) > MAX_H:
        raise FrameError(f"|H| = {len(H)} exceeds {MAX_H}")
    if len(np.unique(H, axis=0)) != len(H):
        raise FrameError("H must consist of distinct frequencies")
    cache = cache or FTCache(surface, window)
    lam = spectrum.points
    if len(lam):
        diffs = lam[:, None, :] - H[None, :, :]
        M = cache(diffs.reshape(-1, surface.d)).reshape(len(lam), len(H))
        A = M.T @ M.conj()
    else:
        A = np.zeros((len(H), len(H)), dtype=complex)
    G = cache((H[None, :, :] - H[:, None, :]).reshape(-1, surface.d)).reshape(len(H), len(H))
    A = 0.5 * (A + A.conj().T)
    G = 0.5 * (G + G.conj().T)
    cond = float(np.linalg.cond(G))
    if not np.isfinite(cond) or cond > max_cond:
        raise FrameError(f"Gram matrix condition number {cond:.3g} exceeds {max_cond:.0e}", cond)
    # c^T X conj(c) is the Hermitian form of X at conj(c), so eigh applies as is
    alphas = scipy.linalg.eigh(A, G, eigvals_only=True)
    return FrameEstimate(H, len(lam), A, G, float(alphas[0]), float(alphas[-1]), cond)
