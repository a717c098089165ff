"""Concrete surfaces and windows, plus the JSON loader for them.

Every chart here carries analytic first and second derivatives.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .surface_model import Chart, Surface, SurfaceError, Window, full_overlap

TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------- curves


def _curve_chart(f, df, d2f, lo, hi, periodic, name):
    def embed(u):
        return f(u[..., 0])

    def jac(u):
        return df(u[..., 0])[..., :, None]

    def hess(u):
        return d2f(u[..., 0])[..., None, None, :]

    return Chart(2, (lo,), (hi,), embed, jac, hess, periodic=(periodic,), name=name)


def _ellipse_chart(ax, ay, lo=0.0, hi=TWO_PI, periodic=True, name="circle", center=(0.0, 0.0)):
    cx, cy = center
    return _curve_chart(
        lambda t: np.stack([cx + ax * np.cos(t), cy + ay * np.sin(t)], -1),
        lambda t: np.stack([-ax * np.sin(t), ay * np.cos(t)], -1),
        lambda t: np.stack([-ax * np.cos(t), -ay * np.sin(t)], -1),
        lo, hi, periodic, name)


def circle(r: float = 1.0, center=(0.0, 0.0)) -> Surface:
    """Circle of radius ``r`` parameterized by angle on ``[0, 2 pi)``."""
    if r <= 0:
        raise SurfaceError("radius must be positive")
    chart = _ellipse_chart(r, r, center=tuple(center))
    return Surface((chart,), name=f"circle(r={r})", closed=True,
                   spec={"kind": "circle", "params": {"r": r}})


def profile_curve(t):
    """The self-intersecting curve ``(cos t + 2 cos 2t, sin t + sin 2t)`` and its derivatives."""
    a = np.cos(t) + 2 * np.cos(2 * t)
    b = np.sin(t) + np.sin(2 * t)
    da = -np.sin(t) - 4 * np.sin(2 * t)
    db = np.cos(t) + 2 * np.cos(2 * t)
    d2a = -np.cos(t) - 8 * np.cos(2 * t)
    d2b = -np.sin(t) - 4 * np.sin(2 * t)
    return a, b, da, db, d2a, d2b


def figure1_curve() -> Surface:
    def f(t):
        a, b, *_ = profile_curve(t)
        return np.stack([a, b], -1)

    def df(t):
        _, _, da, db, _, _ = profile_curve(t)
        return np.stack([da, db], -1)

    def d2f(t):
        *_, d2a, d2b = profile_curve(t)
        return np.stack([d2a, d2b], -1)

    chart = _curve_chart(f, df, d2f, 0.0, TWO_PI, True, "figure1")
    return Surface((chart,), name="figure1_curve", closed=True,
                   spec={"kind": "figure1_curve", "params": {}})


def line(length: float = 2.0) -> Surface:
    """Flat segment ``(x, 0)``; zero curvature, used to exercise validation failures."""
    chart = _curve_chart(
        lambda t: np.stack([t, np.zeros_like(t)], -1),
        lambda t: np.stack([np.ones_like(t), np.zeros_like(t)], -1),
        lambda t: np.stack([np.zeros_like(t), np.zeros_like(t)], -1),
        -length / 2, length / 2, False, "line")
    return Surface((chart,), name="line", spec={"kind": "line", "params": {"length": length}})


# --------------------------------------------------------------------------- unit spheres S^k (k = 1, 2)


def _sphere_param(k: int):
    """Angles -> S^k with derivatives; returns (omega, domega, d2omega, lower, upper, periodic)."""
    if k == 1:
        def om(v):
            p = v[..., 0]
            return np.stack([np.cos(p), np.sin(p)], -1)

        def dom(v):
            p = v[..., 0]
            return np.stack([-np.sin(p), np.cos(p)], -1)[..., :, None]

        def d2om(v):
            return -om(v)[..., None, None, :]

        return om, dom, d2om, (0.0,), (TWO_PI,), (True,)
    if k == 2:
        def om(v):
            al, be = v[..., 0], v[..., 1]
            return np.stack([np.sin(al) * np.cos(be), np.sin(al) * np.sin(be), np.cos(al)], -1)

        def dom(v):
            al, be = v[..., 0], v[..., 1]
            d_al = np.stack([np.cos(al) * np.cos(be), np.cos(al) * np.sin(be), -np.sin(al)], -1)
            d_be = np.stack([-np.sin(al) * np.sin(be), np.sin(al) * np.cos(be), np.zeros_like(al)], -1)
            return np.stack([d_al, d_be], -1)

        def d2om(v):
            al, be = v[..., 0], v[..., 1]
            z = np.zeros_like(al)
            aa = np.stack([-np.sin(al) * np.cos(be), -np.sin(al) * np.sin(be), -np.cos(al)], -1)
            ab = np.stack([-np.cos(al) * np.sin(be), np.cos(al) * np.cos(be), z], -1)
            bb = np.stack([-np.sin(al) * np.cos(be), -np.sin(al) * np.sin(be), z], -1)
            return np.stack([np.stack([aa, ab], -2), np.stack([ab, bb], -2)], -3)

        return om, dom, d2om, (0.0, 0.0), (math.pi, TWO_PI), (False, True)
    raise SurfaceError("revolution surfaces are available for d <= 4")


_A_ROOTS = (math.acos((-1 + math.sqrt(33)) / 8), math.acos((-1 - math.sqrt(33)) / 8))


def revolution_surface(d: int = 3) -> Surface:
    """Rotate the profile curve about the last axis: ``(a(t) w, b(t))``, ``w`` in S^{d-2}.

    The profile angle range is cut where ``a`` vanishes (the surface meets
    the axis there), so every chart has a smooth area element.
    """
    if d == 2:
        return figure1_curve()
    if d < 2:
        raise SurfaceError("d must be at least 2")
    om, dom, d2om, vlo, vhi, vper = _sphere_param(d - 2)
    k = d - 1
    r1, r2 = _A_ROOTS
    cuts = [(-r1, r1), (r1, r2), (r2, TWO_PI - r2), (TWO_PI - r2, TWO_PI - r1)]

    def embed(u):
        a, b, *_ = profile_curve(u[..., 0])
        return np.concatenate([a[..., None] * om(u[..., 1:]), b[..., None]], -1)

    def jac(u):
        a, b, da, db, _, _ = profile_curve(u[..., 0])
        w, dw = om(u[..., 1:]), dom(u[..., 1:])
        col0 = np.concatenate([da[..., None] * w, db[..., None]], -1)
        rest = np.concatenate([a[..., None, None] * dw, np.zeros(dw.shape[:-2] + (1, k - 1))], -2)
        return np.concatenate([col0[..., :, None], rest], -1)

    def hess(u):
        a, b, da, db, d2a, d2b = profile_curve(u[..., 0])
        w, dw, d2w = om(u[..., 1:]), dom(u[..., 1:]), d2om(u[..., 1:])
        out = np.zeros(u.shape[:-1] + (k, k, d))
        out[..., 0, 0, :] = np.concatenate([d2a[..., None] * w, d2b[..., None]], -1)
        cross = da[..., None, None] * np.swapaxes(dw, -1, -2)  # (..., k-1, d-1)
        out[..., 0, 1:, :-1] = cross
        out[..., 1:, 0, :-1] = cross
        out[..., 1:, 1:, :-1] = a[..., None, None, None] * d2w
        return out

    charts = tuple(Chart(d, (lo,) + vlo, (hi,) + vhi, embed, jac, hess,
                         periodic=(False,) + vper, name=f"revolution[{j}]")
                   for j, (lo, hi) in enumerate(cuts))
    return Surface(charts, name=f"revolution_surface(d={d})", closed=True,
                   spec={"kind": "revolution_surface", "params": {"d": d}})


def revolution_coords(d: int, theta):
    """Chart indices and parameters of the points with profile angle ``theta``.

    The remaining angles sit mid-range; curvature does not depend on them.
    """
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    if d == 2:
        return np.zeros(len(theta), dtype=int), theta[:, None]
    surf = revolution_surface(d)
    r1, r2 = _A_ROOTS
    t = np.where(theta >= TWO_PI - r1, theta - TWO_PI, theta)
    idx = np.searchsorted([r1, r2, TWO_PI - r2], t, side="right")
    ch = surf.charts[0]
    mid = [0.5 * (lo + hi) for lo, hi in zip(ch.lower[1:], ch.upper[1:])]
    return idx, np.column_stack([t] + [np.full(len(t), m) for m in mid])


# --------------------------------------------------------------------------- cube-sphere atlas


def _face_chart(d, axis, sign, scale, lower, upper, name):
    """Gnomonic chart of one cube face, projected to the sphere and scaled."""
    others = [j for j in range(d) if j != axis]
    scale = np.asarray(scale, dtype=float)
    emb = np.zeros((d, d - 1))
    for a, j in enumerate(others):
        emb[j, a] = 1.0

    def q_of(u):
        q = np.empty(u.shape[:-1] + (d,))
        q[..., others] = u
        q[..., axis] = sign
        return q

    def embed(u):
        q = q_of(u)
        return scale * q / np.linalg.norm(q, axis=-1, keepdims=True)

    def jac(u):
        q = q_of(u)
        rho = np.linalg.norm(q, axis=-1)[..., None, None]
        y = q[..., :, None] / rho
        # d y / d u_a = (e_a - y y_a) / rho
        ya = y[..., others, 0][..., None, :]
        j = (emb - y * ya) / rho
        return scale[:, None] * j

    def hess(u):
        q = q_of(u)
        rho = np.linalg.norm(q, axis=-1)
        y = q / rho[..., None]
        ya = y[..., others]
        k = d - 1
        out = np.empty(u.shape[:-1] + (k, k, d))
        for a in range(k):
            for b in range(k):
                val = (-emb[:, a] * ya[..., b, None] - emb[:, b] * ya[..., a, None]
                       + 3 * y * (ya[..., a] * ya[..., b])[..., None])
                if a == b:
                    val = val - y
                out[..., a, b, :] = val / rho[..., None] ** 2
        return scale * out

    return Chart(d, lower, upper, embed, jac, hess, name=name)


def _scale_vector(d, radius, semi_axes):
    if semi_axes is None:
        return np.full(d, float(radius))
    semi = np.asarray(semi_axes, dtype=float)
    if semi.shape != (d,) or np.any(semi <= 0):
        raise SurfaceError("semi_axes must be d positive numbers")
    return float(radius) * semi


def sphere(d: int = 3, radius: float = 1.0, semi_axes=None) -> Surface:
    """Sphere (or ellipsoid with ``semi_axes``) in R^d.

    For d >= 3 the atlas is the 2d gnomonic cube faces; for d = 2 a single
    angle chart.
    """
    if d < 2:
        raise SurfaceError("d must be at least 2")
    if radius <= 0:
        raise SurfaceError("radius must be positive")
    scale = _scale_vector(d, radius, semi_axes)
    spec = {"kind": "sphere", "params": {"d": d, "radius": radius,
                                         "semi_axes": None if semi_axes is None else list(semi_axes)}}
    if d == 2:
        return Surface((_ellipse_chart(scale[0], scale[1]),), name="sphere(d=2)", closed=True, spec=spec)
    box = ((-1.0,) * (d - 1), (1.0,) * (d - 1))
    charts = tuple(_face_chart(d, ax, s, scale, box[0], box[1], f"face[{'+' if s > 0 else '-'}{ax}]")
                   for ax in range(d) for s in (1.0, -1.0))
    return Surface(charts, name=f"sphere(d={d})", closed=True, spec=spec)


def hemisphere(d: int = 3, radius: float = 1.0, semi_axes=None) -> Surface:
    """Upper half ``{x_d >= 0}`` of a centrally symmetric sphere/ellipsoid.

    The returned surface keeps the full body boundary as ``parent``.
    """
    full = sphere(d, radius, semi_axes)
    scale = _scale_vector(d, radius, semi_axes)
    spec = {"kind": "hemisphere", "params": {"d": d, "radius": radius,
                                             "semi_axes": None if semi_axes is None else list(semi_axes)}}
    if d == 2:
        charts = (_ellipse_chart(scale[0], scale[1], 0.0, math.pi / 2, False, "upper[0]"),
                  _ellipse_chart(scale[0], scale[1], math.pi / 2, math.pi, False, "upper[1]"))
        return Surface(charts, name="hemisphere(d=2)", parent=full, spec=spec)
    top = d - 1
    charts = [_face_chart(d, top, 1.0, scale, (-1.0,) * (d - 1), (1.0,) * (d - 1), f"face[+{top}]")]
    lo = (-1.0,) * (d - 2) + (0.0,)
    hi = (1.0,) * (d - 1)
    for ax in range(d - 1):
        for s in (1.0, -1.0):
            charts.append(_face_chart(d, ax, s, scale, lo, hi, f"face[{'+' if s > 0 else '-'}{ax}]/2"))
    return Surface(tuple(charts), name=f"hemisphere(d={d})", parent=full, spec=spec)


# --------------------------------------------------------------------------- graph caps


def _heights(kind: str, d: int, radius: float, curvatures):
    """Height function, gradient and Hessian over R^{d-1}."""
    k = d - 1
    if kind == "sphere":
        def h(w):
            return np.sqrt(radius**2 - np.sum(w**2, -1))

        def dh(w):
            return -w / h(w)[..., None]

        def d2h(w):
            hv = h(w)[..., None, None]
            return -np.eye(k) / hv - (w[..., :, None] * w[..., None, :]) / hv**3

        return h, dh, d2h, radius
    if kind == "paraboloid":
        c = np.ones(k) if curvatures is None else np.asarray(curvatures, dtype=float)
        if c.shape != (k,) or np.any(c == 0):
            raise SurfaceError("paraboloid needs d-1 nonzero curvatures")

        def h(w):
            return 0.5 * np.sum(c * w**2, -1)

        def dh(w):
            return c * w

        def d2h(w):
            return np.broadcast_to(np.diag(c), w.shape[:-1] + (k, k))

        return h, dh, d2h, None
    raise SurfaceError(f"unknown height function {kind!r}")


def _ball_map(k: int):
    """Smooth map from [-1,1]^k onto the closed unit ball (k = 1, 2)."""
    if k == 1:
        def f(u):
            return u

        def df(u):
            return np.broadcast_to(np.eye(1), u.shape[:-1] + (1, 1))

        def d2f(u):
            return np.zeros(u.shape[:-1] + (1, 1, 1))

        return f, df, d2f
    if k == 2:
        def g(t):
            return np.sqrt(1 - t**2 / 2)

        def dg(t):
            return -t / (2 * g(t))

        def d2g(t):
            return -1 / (2 * g(t)) - t**2 / (4 * g(t) ** 3)

        def f(u):
            x, y = u[..., 0], u[..., 1]
            return np.stack([x * g(y), y * g(x)], -1)

        def df(u):
            x, y = u[..., 0], u[..., 1]
            return np.stack([np.stack([g(y), x * dg(y)], -1), np.stack([y * dg(x), g(x)], -1)], -2)

        def d2f(u):
            # (..., i, a, b)
            x, y = u[..., 0], u[..., 1]
            z = np.zeros_like(x)
            fx = np.stack([np.stack([z, dg(y)], -1), np.stack([dg(y), x * d2g(y)], -1)], -2)
            fy = np.stack([np.stack([y * d2g(x), dg(x)], -1), np.stack([dg(x), z], -1)], -2)
            return np.stack([fx, fy], -3)

        return f, df, d2f
    raise SurfaceError("ball-shaped cap bases are available for d <= 3")


def _graph_chart(d, height, base, half_width, radius, curvatures, name):
    k = d - 1
    if callable(height):
        h = height

        def embed(u):
            w = half_width * u if base == "ball" else u
            return np.concatenate([w, h(w)[..., None]], -1)

        lo, hi = ((-1.0,) * k, (1.0,) * k) if base == "ball" else ((-half_width,) * k, (half_width,) * k)
        if base == "ball" and k > 1:
            raise SurfaceError("ball bases need a catalog height function")
        return Chart(d, lo, hi, embed, name=name)
    h, dh, d2h, rmax = _heights(height, d, radius, curvatures)
    if base == "box":
        if rmax is not None and half_width * math.sqrt(k) >= rmax:
            raise SurfaceError("box base leaves the sphere's graph domain")
        def wmap(u):
            return u, np.broadcast_to(np.eye(k), u.shape[:-1] + (k, k)), np.zeros(u.shape[:-1] + (k, k, k))

        lo, hi = (-half_width,) * k, (half_width,) * k
    elif base == "ball":
        if rmax is not None and half_width >= rmax:
            raise SurfaceError("ball base leaves the sphere's graph domain")
        f, df, d2f = _ball_map(k)

        def wmap(u):
            return half_width * f(u), half_width * df(u), half_width * d2f(u)

        lo, hi = (-1.0,) * k, (1.0,) * k
    else:
        raise SurfaceError(f"unknown base shape {base!r}")

    def embed(u):
        w, _, _ = wmap(u)
        return np.concatenate([w, h(w)[..., None]], -1)

    def jac(u):
        w, dw, _ = wmap(u)
        last = np.einsum("...i,...ia->...a", dh(w), dw)
        return np.concatenate([dw, last[..., None, :]], -2)

    def hess(u):
        w, dw, d2w = wmap(u)
        top = np.moveaxis(d2w, -3, -1)  # (..., a, b, i)
        last = (np.einsum("...ij,...ia,...jb->...ab", d2h(w), dw, dw)
                + np.einsum("...i,...iab->...ab", dh(w), d2w))
        return np.concatenate([top, last[..., None]], -1)

    return Chart(d, lo, hi, embed, jac, hess, name=name)


def cap_graph(d: int = 3, height="sphere", half_width: float = 0.25, base: str = "box",
              radius: float = 1.0, curvatures=None) -> Surface:
    """Graph ``(w, h(w))`` over a box (or ball) of half-width ``half_width``.

    ``height`` is ``"sphere"`` (upper cap of the sphere of ``radius``),
    ``"paraboloid"`` (``sum c_i w_i^2 / 2`` with ``curvatures``) or a
    callable on arrays ``(..., d-1)``, which gets finite-difference derivatives.
    """
    if d < 2:
        raise SurfaceError("d must be at least 2")
    if half_width <= 0:
        raise SurfaceError("half_width must be positive")
    chart = _graph_chart(d, height, base, half_width, radius, curvatures, "cap")
    spec = None
    if not callable(height):
        spec = {"kind": "cap_graph", "params": {"d": d, "height": height, "half_width": half_width,
                                                "base": base, "radius": radius, "curvatures": curvatures}}
    return Surface((chart,), name=f"cap_graph(d={d})", spec=spec)


def spherical_cap(d: int = 3, half_angle: float = math.pi / 6, radius: float = 1.0) -> Surface:
    """Geodesic cap ``{angle to +e_d <= half_angle}`` of the sphere (d = 2, 3)."""
    if not 0 < half_angle < math.pi / 2:
        raise SurfaceError("half_angle must lie in (0, pi/2)")
    surf = cap_graph(d, "sphere", radius * math.sin(half_angle), base="ball", radius=radius)
    return Surface(surf.charts, name=f"spherical_cap(d={d}, angle={half_angle:.6g})",
                   spec={"kind": "spherical_cap", "params": {"d": d, "half_angle": half_angle, "radius": radius}})


def doubled(surface: Surface) -> Surface:
    """Two coincident copies of a single-chart surface with a declared full overlap."""
    if len(surface.charts) != 1:
        raise SurfaceError("doubled() expects a single-chart surface")
    c = surface.charts[0]
    return Surface((c, c), name=f"doubled({surface.name})", overlap_policy="declared",
                   overlaps=full_overlap(0, 1), closed=surface.closed)


def bump_window(surface: Surface, chart_index: int = 0, support_box=None, plateau: float = 0.0,
                floor: float = 0.5, amplitude: float = 1.0, shrink: float = 0.9) -> Window:
    """Product bump window; defaults to the chart domain shrunk by ``shrink`` about its centre."""
    chart = surface.charts[chart_index]
    if support_box is None:
        c = 0.5 * (np.asarray(chart.lower) + np.asarray(chart.upper))
        hw = 0.5 * shrink * chart.widths
        support_box = (tuple(c - hw), tuple(c + hw))
    win = Window(chart_index, tuple(np.atleast_1d(support_box[0])), tuple(np.atleast_1d(support_box[1])),
                 plateau=plateau, floor=floor, amplitude=amplitude)
    win.validate(surface)
    return win


# --------------------------------------------------------------------------- JSON specs

CONSTRUCTORS: dict = {
    "circle": circle,
    "sphere": sphere,
    "hemisphere": hemisphere,
    "cap_graph": cap_graph,
    "spherical_cap": spherical_cap,
    "figure1_curve": figure1_curve,
    "revolution_surface": revolution_surface,
    "line": line,
}


def build_surface(spec: dict) -> Surface:
    kind = spec.get("kind")
    if kind not in CONSTRUCTORS:
        raise SurfaceError(f"unknown surface kind {kind!r}; expected one of {sorted(CONSTRUCTORS)}")
    extra = set(spec) - {"kind", "params"}
    if extra:
        raise SurfaceError(f"unknown surface keys {sorted(extra)}")
    try:
        return CONSTRUCTORS[kind](**spec.get("params", {}))
    except TypeError as exc:
        raise SurfaceError(f"bad parameters for {kind}: {exc}") from None


def build_window(surface: Surface, spec: Optional[dict]) -> Optional[Window]:
    if spec is None:
        return None
    kind = spec.get("kind", "bump_window")
    if kind != "bump_window":
        raise SurfaceError(f"unknown window kind {kind!r}")
    extra = set(spec) - {"kind", "params"}
    if extra:
        raise SurfaceError(f"unknown window keys {sorted(extra)}")
    try:
        return bump_window(surface, **spec.get("params", {}))
    except TypeError as exc:
        raise SurfaceError(f"bad window parameters: {exc}") from None


def load_document(doc: dict):
    """``{"surface": {...}, "window": {...}}`` -> (Surface, Window or None)."""
    surface = build_surface(doc["surface"])
    return surface, build_window(surface, doc.get("window"))
