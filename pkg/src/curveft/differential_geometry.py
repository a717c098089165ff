"""Normals, fundamental forms, stationary points of linear phases and normal cones.

Sign convention: the second fundamental form is ``II_ab = chi_ab . n`` for
the chosen unit normal ``n``, i.e. the Hessian of the height ``(x - p) . n``
in orthonormal tangent coordinates. With the outward normal the unit
sphere therefore has principal curvatures -1 and ``K = (-1)^(d-1)``; the
magnitude ``|K|`` never depends on the orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from .surface_model import Chart, SubsurfaceSelection, Surface, SurfaceError, SurfacePoint, Window


class OrientationError(SurfaceError):
    """Requested orientation direction is tangent to the surface."""


# --------------------------------------------------------------------------- pointwise geometry


def unit_normals(chart: Chart, u) -> np.ndarray:
    """Unit normals from the generalized cross product of the tangent columns."""
    jac = chart.jacobian(u)
    d = chart.dim_ambient
    comps = []
    for k in range(d):
        minor = np.delete(jac, k, axis=-2)
        comps.append((-1) ** (k + d - 1) * np.linalg.det(minor))
    n = np.stack(comps, axis=-1)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def _forms(chart: Chart, u, normals):
    jac = chart.jacobian(u)
    first = np.swapaxes(jac, -1, -2) @ jac
    second = np.einsum("...abi,...i->...ab", chart.hessian(u), normals)
    return first, second


def _principal(first, second):
    chol = np.linalg.cholesky(first)
    linv = np.linalg.inv(chol)
    sym = linv @ second @ np.swapaxes(linv, -1, -2)
    return np.linalg.eigvalsh(0.5 * (sym + np.swapaxes(sym, -1, -2)))


def gaussian_curvature_abs(chart: Chart, u) -> np.ndarray:
    n = unit_normals(chart, u)
    first, second = _forms(chart, u, n)
    return np.abs(np.linalg.det(second) / np.linalg.det(first))


@dataclass(frozen=True)
class ShapeData:
    point: SurfacePoint
    normal: np.ndarray
    first_form: np.ndarray
    second_form: np.ndarray
    principal_curvatures: np.ndarray
    gaussian_curvature: float
    signature: int


def shape_data(chart: Chart, u, orient_toward, chart_index: int = 0) -> ShapeData:
    """Shape data at ``u`` with the unit normal chosen so that ``n . orient_toward >= 0``."""
    u = np.asarray(u, dtype=float).reshape(chart.dim_param)
    e = np.asarray(orient_toward, dtype=float)
    if np.linalg.norm(e) == 0:
        raise OrientationError("orientation direction must be nonzero")
    n = unit_normals(chart, u)
    dot = float(n @ e) / np.linalg.norm(e)
    if abs(dot) < 1e-12:
        raise OrientationError(f"direction {e.tolist()} is tangent at u={u.tolist()}")
    if dot < 0:
        n = -n
    first, second = _forms(chart, u, n)
    kappa = _principal(first, second)
    K = float(np.linalg.det(second) / np.linalg.det(first))
    sig = int(np.sum(kappa > 0) - np.sum(kappa < 0))
    pt = SurfacePoint(chart_index, u, chart.embed(u), float(math.sqrt(abs(np.linalg.det(first)))))
    return ShapeData(pt, n, first, second, kappa, K, sig)


def curvature_closed_form_revolution(theta, d: int):
    """Closed-form ``|K|`` of the revolved profile ``(cos t + 2 cos 2t, sin t + sin 2t)``.

    ``(17 + 6 cos t + 4 cos^3 t) / (a'^2 + a^2)^((d+1)/2)``; for d = 2 this
    is the plane curvature of the profile itself.
    """
    if d < 2:
        raise SurfaceError("d must be at least 2")
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    a = c + 2 * np.cos(2 * theta)
    da = -np.sin(theta) - 4 * np.sin(2 * theta)
    return (17 + 6 * c + 4 * c**3) / (da**2 + a**2) ** ((d + 1) / 2)


# --------------------------------------------------------------------------- regions


@dataclass(frozen=True)
class RegionPiece:
    chart_index: int
    lower: tuple
    upper: tuple
    mask: Optional[Callable] = None
    hard_boundary: bool = True


def region_pieces(surface: Surface, region=None, superlevel: bool = True) -> list:
    """Normalise a region spec into boxes on charts.

    ``region`` may be ``None`` (whole surface), a SubsurfaceSelection, a
    Window (its superlevel set ``{psi >= floor}``; with ``superlevel=False``
    its open support), a RegionPiece, or a list of these (union).
    """
    if isinstance(region, (list, tuple)):
        return [p for r in region for p in region_pieces(surface, r, superlevel)]
    if isinstance(region, RegionPiece):
        return [region]
    if region is None:
        return [RegionPiece(i, c.lower, c.upper, None, not surface.closed) for i, c in enumerate(surface.charts)]
    if isinstance(region, SubsurfaceSelection):
        region.validate(surface)
        return [RegionPiece(i, tuple(b[0]), tuple(b[1])) for i, b in enumerate(region.boxes) if b is not None]
    if isinstance(region, Window):
        region.validate(surface)
        if superlevel:
            level = region.floor * region.amplitude
            mask = lambda u, w=region, lv=level: w.value(u) >= lv * (1 - 1e-12)
        else:
            mask = lambda u, w=region: w.value(u) > 0
        return [RegionPiece(region.chart_index, region.support_lower, region.support_upper, mask)]
    raise SurfaceError(f"unsupported region type {type(region).__name__}")


def _in_piece(chart: Chart, piece: RegionPiece, u, tol=1e-10):
    u = np.asarray(u, dtype=float)
    ok = np.ones(u.shape[:-1], dtype=bool)
    w = np.subtract(piece.upper, piece.lower)
    for a in range(chart.dim_param):
        if chart.periodic[a] and piece.lower[a] <= chart.lower[a] and piece.upper[a] >= chart.upper[a]:
            continue
        ua = u[..., a]
        if chart.periodic[a]:
            ua = piece.lower[a] + np.mod(ua - piece.lower[a], chart.widths[a])
            ua = np.where(ua > piece.upper[a] + tol * w[a] + 0.5 * (chart.widths[a] - w[a]),
                          ua - chart.widths[a], ua)
        ok &= (ua >= piece.lower[a] - tol * w[a]) & (ua <= piece.upper[a] + tol * w[a])
    if piece.mask is not None and ok.any():
        ok[ok] = piece.mask(u[ok])
    return ok


def _on_piece_boundary(chart: Chart, piece: RegionPiece, u, tol=1e-8):
    w = np.subtract(piece.upper, piece.lower)
    for a in range(chart.dim_param):
        if chart.periodic[a] and piece.lower[a] <= chart.lower[a] and piece.upper[a] >= chart.upper[a]:
            continue
        if abs(u[a] - piece.lower[a]) <= tol * w[a] or abs(u[a] - piece.upper[a]) <= tol * w[a]:
            return True
    return False


# --------------------------------------------------------------------------- stationary points


@dataclass(frozen=True)
class StationaryPoint:
    point: SurfacePoint
    shape: ShapeData
    on_boundary: bool = False


@dataclass(frozen=True)
class StationarySet:
    """Stationary points of ``x -> x . e`` in a region.

    ``status`` is ``"ok"`` (points found), ``"empty"`` (direction not
    attained) or ``"boundary"`` (attained only on the region boundary, within
    ``boundary_angle``).
    """

    direction: np.ndarray
    points: list = field(default_factory=list)
    status: str = "ok"
    boundary_angle: float = math.inf

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def unique(self) -> bool:
        return len(self.points) <= 1


def _newton(chart: Chart, u0: np.ndarray, e: np.ndarray, tol: float, max_iter: int = 60):
    """Vectorized damped Newton on ``J(u)^T e = 0``; returns (u, residual, converged).

    ``e`` is one direction ``(d,)`` or one per seed ``(S, d)``.
    """
    u = chart.wrap(u0)
    e_all = np.broadcast_to(np.asarray(e, dtype=float), (len(u), chart.dim_ambient))
    widths = chart.widths
    alive = np.ones(len(u), dtype=bool)
    resid = np.full(len(u), np.inf)
    done = np.zeros(len(u), dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(alive & ~done)
        if idx.size == 0:
            break
        uu, ee = u[idx], e_all[idx]
        with np.errstate(all="ignore"):
            jac = chart.jacobian(uu)
            g = np.einsum("...ia,...i->...a", jac, ee)
            scale = np.linalg.norm(jac, axis=(-2, -1))
            r = np.linalg.norm(g, axis=-1) / scale
            resid[idx] = r
            ok_now = r <= tol
            done[idx[ok_now]] = True
            idx, uu, g, ee = idx[~ok_now], uu[~ok_now], g[~ok_now], ee[~ok_now]
            if idx.size == 0:
                break
            A = np.einsum("...abi,...i->...ab", chart.hessian(uu), ee)
            step = -np.einsum("...ab,...b->...a", np.linalg.pinv(A), g)
        bad = ~np.all(np.isfinite(step), axis=-1)
        alive[idx[bad]] = False
        step = np.where(bad[:, None], 0.0, step)
        ratio = np.max(np.abs(step) / (0.25 * widths), axis=-1)
        step = step / np.maximum(ratio, 1.0)[:, None]
        unew = chart.wrap(uu + step)
        inside = chart.contains(unew, tol=0.1)
        alive[idx[~inside]] = False
        u[idx] = unew
        tiny = np.max(np.abs(step) / widths, axis=-1) < 1e-15
        done[idx[tiny & inside]] = True
    # final residual for points stopped by the step criterion
    if done.any():
        with np.errstate(all="ignore"):
            jac = chart.jacobian(u[done])
            g = np.einsum("...ia,...i->...a", jac, e_all[done])
            resid[done] = np.linalg.norm(g, axis=-1) / np.linalg.norm(jac, axis=(-2, -1))
    return u, resid, done & alive


def _param_close(chart: Chart, u, v, tol):
    diff = np.abs(np.asarray(u) - np.asarray(v))
    for a, per in enumerate(chart.periodic):
        if per:
            diff[a] = min(diff[a], chart.widths[a] - diff[a])
    return np.all(diff <= tol * np.maximum(chart.widths, 1.0))


def stationary_points(surface: Surface, region, direction, seeds_per_axis: int = 32,
                      tol: float = 1e-12, angular_tol: float = 1e-6) -> StationarySet:
    """All region points whose normal is parallel to ``+-direction``.

    Multi-start Newton from a uniform seed grid on each region box, then
    duplicates within parameter distance 1e-8 are merged. If nothing is
    found, the nearest attained normal angle decides between ``"empty"``
    and ``"boundary"``.
    """
    e = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(e)
    if norm == 0:
        raise SurfaceError("direction must be nonzero")
    e = e / norm
    pieces = region_pieces(surface, region, superlevel=True)
    found: list = []
    for piece in pieces:
        chart = surface.charts[piece.chart_index]
        seeds = chart.sample_grid(seeds_per_axis, piece.lower, piece.upper)
        ptol = tol if chart.derivative_mode == "analytic" else max(tol, 1e-8)
        u, resid, conv = _newton(chart, seeds, e, ptol)
        cand = u[conv & (resid <= ptol)]
        if len(cand) == 0:
            continue
        cand = cand[_in_piece(chart, piece, cand)]
        for uc in cand:
            if any(f[0] == piece.chart_index and _param_close(chart, f[1], uc, 1e-8) for f in found):
                continue
            found.append((piece.chart_index, uc, piece))
    points = []
    for ci, uc, piece in found:
        chart = surface.charts[ci]
        sd = shape_data(chart, uc, e, chart_index=ci)
        on_bd = piece.hard_boundary and _on_piece_boundary(chart, piece, uc)
        # shared chart edges of a closed disjoint atlas: keep one copy per position
        if surface.overlap_policy == "disjoint" and _on_piece_boundary(chart, piece, uc):
            if any(np.linalg.norm(sp.point.position - sd.point.position) <= 1e-8 for sp in points):
                continue
        points.append(StationaryPoint(sd.point, sd, on_bd))
    points.sort(key=lambda sp: (sp.point.chart_index, tuple(sp.point.u)))
    if points:
        return StationarySet(e, points, "ok", 0.0)
    ang = nearest_normal_angle(surface, region, e, seeds_per_axis=seeds_per_axis)
    return StationarySet(e, [], "boundary" if ang <= angular_tol else "empty", ang)


def _angle(n, e):
    return np.arccos(np.clip(np.abs(n @ e), 0.0, 1.0))


def nearest_normal_angle(surface: Surface, region, direction, seeds_per_axis: int = 32) -> float:
    """Smallest angle between ``+-direction`` and a normal attained in the region."""
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    best = math.inf
    for piece in region_pieces(surface, region, superlevel=True):
        chart = surface.charts[piece.chart_index]
        grid = chart.sample_grid(seeds_per_axis, piece.lower, piece.upper)
        if piece.mask is not None:
            grid = grid[piece.mask(grid)]
            if len(grid) == 0:
                continue
        ang = _angle(unit_normals(chart, grid), e)
        bounds = list(zip(piece.lower, piece.upper))

        def objective(u, chart=chart, piece=piece):
            u = np.asarray(u, dtype=float)
            if piece.mask is not None and not _in_piece(chart, piece, u[None, :])[0]:
                return 2.0
            return 1.0 - float(unit_normals(chart, u) @ e) ** 2

        for j in np.argsort(ang)[:3]:
            best = min(best, float(ang[j]))
            if piece.mask is None:
                res = minimize(objective, grid[j], method="L-BFGS-B", bounds=bounds,
                               options={"ftol": 1e-15, "gtol": 1e-12})
            else:
                res = minimize(objective, grid[j], method="Nelder-Mead",
                               options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 2000})
            ux = np.clip(res.x, piece.lower, piece.upper)
            if _in_piece(chart, piece, ux[None, :])[0]:
                best = min(best, float(_angle(unit_normals(chart, ux), e)))
    return best


def normal_cone_membership(surface: Surface, region, xi, angular_tol: float = 1e-3,
                           seeds_per_axis: int = 32) -> bool:
    """Whether the line through ``xi`` is (within ``angular_tol``) a normal line of the region."""
    xi = np.asarray(xi, dtype=float)
    if np.linalg.norm(xi) == 0:
        raise SurfaceError("xi must be nonzero")
    return bool(membership_many(surface, region, xi[None, :], angular_tol, seeds_per_axis)[0][0])


# --------------------------------------------------------------------------- batched membership


def _normal_samples(surface: Surface, region, samples_per_axis: int):
    """Dense normal samples per region piece plus a bound on the sampling gap."""
    rows = []
    for piece in region_pieces(surface, region, superlevel=True):
        chart = surface.charts[piece.chart_index]
        k = chart.dim_param
        n = samples_per_axis
        grid = chart.sample_grid(n, piece.lower, piece.upper)
        normals = unit_normals(chart, grid)
        shaped = normals.reshape((n,) * k + (chart.dim_ambient,))
        gap = 0.0
        for a in range(k):
            dots = np.abs(np.sum(np.take(shaped, range(1, n), axis=a) * np.take(shaped, range(n - 1), axis=a), -1))
            gap = max(gap, float(np.arccos(np.clip(dots.min(), -1, 1))))
        keep = np.ones(len(grid), dtype=bool) if piece.mask is None else piece.mask(grid)
        rows.append((piece, chart, grid[keep], normals[keep], gap * math.sqrt(k)))
    return rows


def membership_many(surface: Surface, region, directions, angular_tol: float = 1e-3,
                    seeds_per_axis: int = 32, samples_per_axis: Optional[int] = None):
    """Vectorized cone membership for many directions.

    Returns ``(member, nearest_angle)``. Directions whose nearest sampled
    normal is within ``angular_tol`` are members outright; those farther than
    the tolerance plus the sampling gap are not; the rest are settled by
    Newton from the nearest sample and, failing that, constrained
    minimization of the normal angle.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)
    d = surface.d
    if samples_per_axis is None:
        samples_per_axis = 1024 if d == 2 else (96 if d == 3 else 24)
    rows = _normal_samples(surface, region, samples_per_axis)
    best = np.full(len(dirs), np.inf)
    best_src = np.full(len(dirs), -1)
    best_idx = np.zeros(len(dirs), dtype=int)
    gaps = []
    for r, (_, _, grid, normals, gap) in enumerate(rows):
        gaps.append(gap)
        if len(grid) == 0:
            continue
        tree = cKDTree(np.concatenate([normals, -normals]))
        dist, idx = tree.query(dirs)
        ang = 2 * np.arcsin(np.clip(dist / 2, 0, 1))
        better = ang < best
        best[better], best_src[better], best_idx[better] = ang[better], r, idx[better] % len(grid)
    gap = max(gaps) if gaps else 0.0
    member = best <= angular_tol
    nearest = best.copy()
    ambiguous = np.flatnonzero(~member & (best <= angular_tol + 2.0 * gap + 1e-12))
    exact = []
    for r, (piece, chart, grid, _, _) in enumerate(rows):
        js = ambiguous[best_src[ambiguous] == r]
        if js.size == 0:
            continue
        ptol = 1e-12 if chart.derivative_mode == "analytic" else 1e-8
        u, resid, conv = _newton(chart, grid[best_idx[js]], dirs[js], ptol)
        inside = conv & _in_piece(chart, piece, u)
        member[js[inside]] = True
        nearest[js[inside]] = 0.0
        for j, uj, cj in zip(js[~inside], u[~inside], conv[~inside]):
            if cj:
                # attained just outside the piece: the clamped point bounds the angle
                uc = np.clip(uj, piece.lower, piece.upper)
                if _in_piece(chart, piece, uc[None, :])[0]:
                    nearest[j] = min(nearest[j], float(_angle(unit_normals(chart, uc), dirs[j])))
            if nearest[j] <= angular_tol:
                member[j] = True
            elif nearest[j] <= 10 * angular_tol:
                exact.append(j)
    for j in exact:
        nearest[j] = min(nearest[j], nearest_normal_angle(surface, region, dirs[j], seeds_per_axis))
        member[j] = nearest[j] <= angular_tol
    return member, nearest


def sphere_cells(d: int, resolution: float):
    """Deterministic tessellation of S^{d-1} by refining the cube faces.

    Returns cell-centre directions ``(M, d)`` and their solid-angle weights.
    """
    m = max(1, math.ceil(2.0 * math.sqrt(d - 1) / resolution))
    centres = -1 + (np.arange(m) + 0.5) * 2.0 / m
    grids = np.meshgrid(*([centres] * (d - 1)), indexing="ij")
    u = np.stack([g.ravel() for g in grids], -1)
    jac = (1 + np.sum(u**2, -1)) ** (-d / 2) * (2.0 / m) ** (d - 1)
    dirs, weights = [], []
    for axis in range(d):
        others = [j for j in range(d) if j != axis]
        for s in (1.0, -1.0):
            q = np.empty((len(u), d))
            q[:, others] = u
            q[:, axis] = s
            dirs.append(q / np.linalg.norm(q, axis=-1, keepdims=True))
            weights.append(jac)
    return np.concatenate(dirs), np.concatenate(weights)


@dataclass
class CoverageReport:
    fraction: float
    resolution: float
    directions: np.ndarray
    member: np.ndarray
    nearest_angle: np.ndarray
    weights: np.ndarray

    @property
    def uncovered(self) -> np.ndarray:
        return self.directions[~self.member]

    def rows(self):
        for e, m, a in zip(self.directions, self.member, self.nearest_angle):
            yield list(e) + [int(m), float(a)]


def normal_cone_coverage(surface: Surface, region=None, angular_resolution: float = math.pi / 64,
                         angular_tol: float = 1e-3) -> CoverageReport:
    """Solid-angle fraction of S^{d-1} whose cell centres lie in the normal cone (with +-)."""
    if not 0 < angular_resolution <= math.pi / 8:
        raise SurfaceError("angular_resolution must lie in (0, pi/8]")
    dirs, weights = sphere_cells(surface.d, angular_resolution)
    member, nearest = membership_many(surface, region, dirs, angular_tol)
    frac = float(np.sum(weights[member]) / np.sum(weights))
    return CoverageReport(frac, angular_resolution, dirs, member, nearest, weights)
