"""Frame-bound estimates over growing test-frequency sets.

A flat-ish cap with a full base lattice keeps alpha_min bounded below; the
circle with a spectrum confined to a narrow cone around the vertical axis
loses it as horizontal test frequencies are added.
"""

import math
import os

import numpy as np

from _common import params_hash, parse_out

from curveft import catalog
from curveft.frame_diagnostics import FTCache, Spectrum, frame_bounds_estimate, generate_spectrum
from curveft.outputs import write_csv, write_json


def main():
    args = parse_out("frame_trends", __doc__)
    sizes = [8, 16, 32] if args.quick else [8, 16, 32, 64, 96]
    params = {"sizes": sizes, "cap_half_width": 0.25, "cap_lattice_radius": 160, "cap_H_spacing": 2,
              "cone_half_angle": math.pi / 12, "cone_radius": 40}
    h = params_hash(params)
    cap = catalog.cap_graph(2, half_width=params["cap_half_width"])
    base = np.arange(-params["cap_lattice_radius"], params["cap_lattice_radius"] + 1, dtype=float)
    cap_lam = Spectrum(np.column_stack([base, np.zeros_like(base)]))
    circ = catalog.circle()
    cone = generate_spectrum({"kind": "cone_lattice", "axis": [0, 1], "half_angle": params["cone_half_angle"],
                              "spacing": 1, "radius": params["cone_radius"]}, 2)
    rows, summary = [], {"params": params}
    for name, surf, lam, spacing in (("cap", cap, cap_lam, 2.0), ("circle_cone", circ, cone, 1.0)):
        cache = FTCache(surf, None)
        for n in sizes:
            H = np.column_stack([spacing * np.arange(-n // 2, n // 2), np.zeros(n)])
            est = frame_bounds_estimate(surf, None, lam, H, cache=cache)
            rows.append([name, n, est.alpha_min, est.alpha_max, est.cond_G])
            print(f"{name:12s} |H|={n:3d}: alpha_min {est.alpha_min:.4g}, alpha_max {est.alpha_max:.4g}, "
                  f"cond_G {est.cond_G:.3g}")
        summary[name] = [r[2] for r in rows if r[0] == name]
    write_csv(os.path.join(args.out, "frame_trends.csv"), ["surface", "H_size", "alpha_min", "alpha_max", "cond_G"],
              rows, h)
    summary["params_sha256"] = h
    write_json(os.path.join(args.out, "summary.json"), summary)


if __name__ == "__main__":
    main()
