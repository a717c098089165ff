"""Composite Gauss-Legendre rules on boxes.

Per-axis rules are built from equal panels of bounded order, so high node
counts never require a single huge Legendre rule. Optional breakpoints
split an axis where the integrand is only piecewise analytic.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

MAX_PANEL_ORDER = 48
MIN_PANEL_ORDER = 8


@lru_cache(maxsize=256)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def ladder(n: int, minimum: int = 16) -> int:
    """Round ``n`` up to the quarter-octave ladder ``minimum * 2**(k/4)``.

    Keeps the number of distinct node sets small across frequency scans.
    """
    n = max(int(n), minimum)
    k = math.ceil(4.0 * math.log2(n / minimum) - 1e-12)
    return int(math.ceil(minimum * 2.0 ** (k / 4.0)))


def interval_rule(a: float, b: float, n: int, breakpoints=()) -> tuple[np.ndarray, np.ndarray]:
    """Composite GL rule with about ``n`` nodes on ``[a, b]``.

    Nodes are spread over the sub-intervals cut by ``breakpoints`` in
    proportion to their length; each sub-interval is split into panels
    of order at most ``MAX_PANEL_ORDER``.
    """
    cuts = [a] + sorted(float(c) for c in breakpoints if a < c < b) + [b]
    width = b - a
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        share = max(MIN_PANEL_ORDER, math.ceil(n * (hi - lo) / width))
        panels = max(1, math.ceil(share / MAX_PANEL_ORDER))
        order = max(MIN_PANEL_ORDER, math.ceil(share / panels))
        x0, w0 = _legendre(order)
        edges = np.linspace(lo, hi, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        xs.append((mid[:, None] + half[:, None] * x0[None, :]).ravel())
        ws.append((half[:, None] * w0[None, :]).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def _tensor(axes) -> tuple[np.ndarray, np.ndarray]:
    grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
    wgrids = np.meshgrid(*[ax[1] for ax in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return nodes, weights


def _axis_rules(lower, upper, n_per_axis, breakpoints):
    k = len(lower)
    if breakpoints is None:
        breakpoints = [()] * k
    return [interval_rule(lower[i], upper[i], n_per_axis[i], breakpoints[i]) for i in range(k)]


def box_rule(lower, upper, n_per_axis, breakpoints=None) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product rule on a box; returns nodes ``(N, k)`` and weights ``(N,)``."""
    return _tensor(_axis_rules(lower, upper, n_per_axis, breakpoints))


def box_rule_slabs(lower, upper, n_per_axis, breakpoints=None, slab_nodes: int = 1 << 20):
    """The same rule as ``box_rule``, yielded in slabs along the first axis.

    Each slab holds at most ``slab_nodes`` nodes (at least one first-axis row).
    """
    axes = _axis_rules(lower, upper, n_per_axis, breakpoints)
    rest = int(np.prod([len(ax[0]) for ax in axes[1:]], dtype=np.int64))
    step = max(1, slab_nodes // max(rest, 1))
    x0, w0 = axes[0]
    for s in range(0, len(x0), step):
        yield _tensor([(x0[s:s + step], w0[s:s + step])] + axes[1:])
