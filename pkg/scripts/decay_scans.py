"""Decay envelopes and zero patterns along rays.

Circle and sphere along the diagonal, then the upper hemisphere along the
axis for d = 2..5 against the full sphere. Writes one CSV per scan and a
summary JSON of the fits.
"""

import math
import os

import numpy as np

from _common import params_hash, parse_out

from curveft import catalog
from curveft.oscillatory_fourier import (FitError, decay_phase_fit, ft_point, hemisphere_axis_profile,
                                         sphere_axis_values)
from curveft.outputs import write_csv, write_json


def main():
    args = parse_out("decay_scans", __doc__)
    step = 0.2 if args.quick else 0.05
    params = {"ray": [10.0137, 50.0], "step": step, "axis": [10.0037, 200.0037]}
    h = params_hash(params)
    summary = {"params": params}
    for d, surf in ((2, catalog.circle()), (3, catalog.sphere(3))):
        e = np.ones(d) / math.sqrt(d)
        radii = np.arange(params["ray"][0], params["ray"][1], step if d == 2 else 2 * step)
        vals = np.array([ft_point(surf, None, r * e).value for r in radii])
        write_csv(os.path.join(args.out, f"ray_d{d}.csv"), ["radius", "re", "im"],
                  [[r, v.real, v.imag] for r, v in zip(radii, vals)], h)
        summary[f"ray_d{d}"] = dict(decay_phase_fit(radii, vals, d).to_dict(), expected_exponent=-(d - 1) / 2)
        print(f"d={d}: exponent {summary[f'ray_d{d}']['slope']:.4f}, "
              f"zero error {summary[f'ray_d{d}']['max_zero_error']:.2e}")
    xis = np.linspace(params["axis"][0], params["axis"][1], 400 if args.quick else 1901)
    for d in (2, 3, 4, 5):
        prof = hemisphere_axis_profile(d, xis)
        full = sphere_axis_values(d, xis)
        write_csv(os.path.join(args.out, f"hemisphere_axis_d{d}.csv"), ["xi_d", "re", "im", "sphere_re"],
                  [[x, v.real, v.imag, s.real] for x, v, s in zip(xis, prof.values, full)], h)
        try:
            sphere_exp = decay_phase_fit(xis, full, d).exponent
        except FitError:
            sphere_exp = None
        summary[f"hemisphere_d{d}"] = dict(prof.to_dict(), sphere_exponent=sphere_exp)
        print(f"hemisphere d={d}: slope {prof.slope:.4f}, sphere envelope {sphere_exp}")
    summary["params_sha256"] = h
    write_json(os.path.join(args.out, "summary.json"), summary)


if __name__ == "__main__":
    main()
