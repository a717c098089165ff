"""Reference values computed independently of the quadrature and geometry code."""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np


def bessel_j0(x, dps: int = 30) -> np.ndarray:
    """J0 by mpmath at ``dps`` digits."""
    with mpmath.workdps(dps):
        return np.array([float(mpmath.besselj(0, float(v))) for v in np.ravel(x)]).reshape(np.shape(x))


def circle_ft(xi) -> np.ndarray:
    """Unit circle: ``2 pi J0(2 pi |xi|)``."""
    q = np.linalg.norm(np.atleast_2d(xi), axis=-1)
    return 2 * math.pi * bessel_j0(2 * math.pi * q)


def sphere_ft(xi) -> np.ndarray:
    """Unit sphere in R^3: ``2 sin(2 pi |xi|) / |xi|`` (``4 pi`` at 0)."""
    q = np.linalg.norm(np.atleast_2d(xi), axis=-1)
    safe = np.where(q > 0, q, 1.0)
    return np.where(q > 0, 2 * np.sin(2 * math.pi * q) / safe, 4 * math.pi)


def hemisphere_axis_d3(xi3) -> np.ndarray:
    """Upper unit hemisphere in R^3 along the axis: ``2 pi (1 - exp(-2 pi i x)) / (2 pi i x)``."""
    x = np.asarray(xi3, dtype=float)
    safe = np.where(x != 0, x, 1.0)
    val = 2 * math.pi * (1 - np.exp(-2j * math.pi * x)) / (2j * math.pi * safe)
    return np.where(x != 0, val, 2 * math.pi + 0j)


def sphere_area(d: int, radius: float = 1.0) -> float:
    """Area of the sphere S^{d-1} of the given radius."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2) * radius ** (d - 1)


def spherical_cap_area(half_angle: float, radius: float = 1.0) -> float:
    """Area of a cap on the 2-sphere."""
    return 2 * math.pi * radius**2 * (1 - math.cos(half_angle))


def lattice_count(d: int, radius: float) -> int:
    """Integer points of norm at most ``radius``, by brute force."""
    m = int(math.floor(radius))
    r2 = radius * radius
    return sum(1 for p in itertools.product(range(-m, m + 1), repeat=d) if sum(c * c for c in p) <= r2 + 1e-9)


def axis_basel_sum(radius: int) -> float:
    """``sum_{0 < |n| <= R} n^-2`` exactly, and its limit is ``pi^2/3``."""
    return float(2 * mpmath.fsum(mpmath.mpf(1) / (n * n) for n in range(1, int(radius) + 1)))


def axis_basel_limit() -> float:
    return 2 * math.pi**2 / 6


def wallis(d: int) -> float:
    """``int_0^{pi/2} sin(t)^(d-2) dt``."""
    return math.sqrt(math.pi) * math.gamma((d - 1) / 2) / (2 * math.gamma(d / 2))


def figure1_arc_length() -> float:
    """Length of the figure-1 curve by adaptive quadrature of its speed."""
    from scipy.integrate import quad

    def speed(t):
        da = -math.sin(t) - 4 * math.sin(2 * t)
        db = math.cos(t) + 2 * math.cos(2 * t)
        return math.hypot(da, db)

    return quad(speed, 0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def cone_partition_2d(points, half_angle: float, tol: float = 1e-3):
    """Membership of plane points in the double cone of half-angle ``half_angle`` about the vertical axis."""
    pts = np.asarray(points, dtype=float)
    out = []
    for x, y in pts:
        if x == 0 and y == 0:
            out.append(True)
            continue
        ang = math.atan2(abs(x), abs(y))
        out.append(ang <= half_angle + tol)
    return np.array(out, dtype=bool)
