"""Normal-cone coverage, the cone lower bound and ball-averaged energies.

Coverage of spherical caps is compared with ``1 - cos(angle)``. The lower
bound check runs over cone frequencies of a windowed cap. Ball averages of
``|mu^|^2`` for the circle and the sphere are scaled by ``R^(d-1)`` to show
their leveling off (exploratory).
"""

import math
import os

import numpy as np

from _common import params_hash, parse_out

from curveft import catalog
from curveft.differential_geometry import normal_cone_coverage
from curveft.frame_diagnostics import cone_frequencies, cone_lower_bound_check
from curveft.oscillatory_fourier import ball_average_energy
from curveft.outputs import write_csv, write_json


def main():
    args = parse_out("cones_and_energy", __doc__)
    angles = [math.pi / 12, math.pi / 6, math.pi / 4, math.pi / 3]
    radii = [10.0, 20.0] if args.quick else [10.0, 20.0, 40.0, 80.0]
    params = {"angles": angles, "resolution": math.pi / 64, "energy_radii": radii}
    h = params_hash(params)
    summary = {"params": params}
    cov_rows = []
    for a in angles:
        frac = normal_cone_coverage(catalog.spherical_cap(3, a), None, params["resolution"]).fraction
        cov_rows.append([a, frac, 1 - math.cos(a)])
        print(f"cap angle {a:.4f}: coverage {frac:.4f} vs {1 - math.cos(a):.4f}")
    summary["figure1_coverage"] = normal_cone_coverage(catalog.figure1_curve(), None, params["resolution"]).fraction
    write_csv(os.path.join(args.out, "coverage.csv"), ["half_angle", "fraction", "exact"], cov_rows, h)

    lb = {}
    for d in (2, 3):
        cap = catalog.cap_graph(d, half_width=0.6)
        win = catalog.bump_window(cap)
        rep = cone_lower_bound_check(cap, win, cone_frequencies(cap, win, np.geomspace(10, 100, 6), 6))
        lb[f"d{d}"] = rep.to_dict()
        print(f"cone lower bound d={d}: min ratio {rep.min_ratio:.3f}")
    summary["lower_bound"] = lb

    erows = []
    for d, surf in ((2, catalog.circle()), (3, catalog.sphere(3))):
        for R in (radii if d == 2 else radii[:2]):
            center = np.zeros(d)
            center[0] = R
            avg = ball_average_energy(surf, None, center)
            erows.append([d, R, avg, avg * R ** (d - 1)])
            print(f"d={d} R={R:g}: R^(d-1) * ball average {avg * R ** (d - 1):.4f}")
    write_csv(os.path.join(args.out, "ball_energy.csv"), ["d", "R", "average", "scaled"], erows, h)
    summary["params_sha256"] = h
    write_json(os.path.join(args.out, "summary.json"), summary)


if __name__ == "__main__":
    main()
