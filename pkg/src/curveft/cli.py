"""curveft command line.

Every command except ``verify`` takes ``--config <json>`` and writes into
``--out <dir>``. Exit codes: 0 success, 1 usage or config error,
2 validation failure (or every sample failed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import catalog
from .acceptance import SUITES, run_suite
from .config import ConfigError, load_config
from .differential_geometry import normal_cone_coverage
from .frame_diagnostics import (FrameError, SpectrumError, divergence_partial_sum, frame_bounds_estimate,
                                generate_spectrum)
from .oscillatory_fourier import (FitError, decay_phase_fit, ft_point, ft_scan,
                                  hemisphere_axis_profile, hemisphere_symmetry_check, scan_frequencies,
                                  sphere_axis_values, stationary_phase_eval)
from .outputs import write_csv, write_json
from .surface_model import SurfaceError, total_mass, validate_surface

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(cfg):
    try:
        doc = {"surface": cfg.surface}
        if cfg.window is not None:
            doc["window"] = cfg.window
        return catalog.load_document(doc)
    except (SurfaceError, KeyError, TypeError) as exc:
        raise UsageError(f"bad surface/window spec: {exc}") from None


def _say(msg):
    print(msg, flush=True)


def cmd_surface_info(cfg, out):
    surface, window = _load(cfg)
    reports = validate_surface(surface, cfg.samples_per_axis)
    passed = all(r.passed for r in reports)
    payload = {"surface": surface.name, "d": surface.d, "charts": len(surface.charts), "passed": passed,
               "charts_report": [r.to_dict() for r in reports],
               "min_abs_curvature": min(r.min_abs_curvature for r in reports),
               "max_abs_curvature": max(r.max_abs_curvature for r in reports),
               "config_sha256": cfg.sha256()}
    if passed:
        payload["total_mass"] = total_mass(surface, window)
    write_json(os.path.join(out, "surface_info.json"), payload)
    _say(f"surface-info {surface.name}: {'pass' if passed else 'FAIL'}"
         + ("" if passed else f" ({next(r.reason for r in reports if not r.passed)})"))
    return EXIT_OK if passed else EXIT_FAILED


def cmd_ft_scan(cfg, out):
    surface, window = _load(cfg)
    try:
        freqs = scan_frequencies(cfg.scan, surface.d)
        res = ft_scan(surface, window, freqs, max_norm=cfg.max_norm, **cfg.ft_options)
    except (SurfaceError, KeyError) as exc:
        raise UsageError(f"bad scan: {exc}") from None
    d = surface.d
    header = [f"xi_{i + 1}" for i in range(d)] + ["re", "im", "abs", "nodes", "err_est"]
    h = cfg.sha256()
    write_csv(os.path.join(out, "ft_scan.csv"), header, [s.row() for s in res.samples], h)
    write_json(os.path.join(out, "ft_scan.json"), {"samples": len(res.samples), "failures": res.failures,
                                                    "config_sha256": h})
    _say(f"ft-scan {surface.name}: {len(res.samples)} samples, {len(res.failures)} failures")
    if res.samples and len(res.failures) == len(res.samples):
        return EXIT_FAILED
    return EXIT_OK


def cmd_sp_compare(cfg, out):
    surface, window = _load(cfg)
    e = np.asarray(cfg.direction, dtype=float)
    if e.shape != (surface.d,) or not np.linalg.norm(e) > 0:
        raise UsageError("direction must be a nonzero vector of length d")
    e = e / np.linalg.norm(e)
    radii = cfg.radius_list()
    rows, failures = [], []
    for r in radii:
        xi = r * e
        try:
            ft = ft_point(surface, window, xi, **cfg.ft_options)
            sp = stationary_phase_eval(surface, window, xi, xi_min=cfg.xi_min)
        except (RuntimeError, SurfaceError) as exc:
            failures.append({"radius": float(r), "error": str(exc)})
            continue
        dev = abs(ft.value - sp.value)
        scaled = dev / abs(sp.value) if cfg.relative and sp.value != 0 else dev * r ** ((surface.d - 1) / 2)
        rows.append([float(r)] + list(xi) + [ft.value.real, ft.value.imag, sp.value.real, sp.value.imag,
                                              len(sp.terms), scaled, ft.err_est])
    h = cfg.sha256()
    header = ["radius"] + [f"xi_{i + 1}" for i in range(surface.d)] + \
        ["ft_re", "ft_im", "sp_re", "sp_im", "points", "deviation", "err_est"]
    write_csv(os.path.join(out, "sp_compare.csv"), header, rows, h)
    fit = {"slope": None, "intercept": None, "residual": None, "zeros": []}
    usable = [(row[0], row[-2]) for row in rows if row[-2] > 0 and np.isfinite(row[-2])]
    if len(usable) >= 2:
        rr, dd = np.array(usable).T
        coef, res, *_ = np.polyfit(np.log(rr), np.log(dd), 1, full=True)
        fit.update(slope=float(coef[0]), intercept=float(coef[1]),
                   residual=float(math.sqrt(res[0] / len(rr))) if len(res) else 0.0)
    write_json(os.path.join(out, "sp_compare.json"), dict(fit, failures=failures, relative=cfg.relative,
                                                          config_sha256=h))
    _say(f"sp-compare {surface.name}: slope {fit['slope']}, {len(failures)} failures")
    return EXIT_FAILED if radii.size and not rows else EXIT_OK


def cmd_hemisphere(cfg, out):
    xis = cfg.xi_list()
    prof = hemisphere_axis_profile(cfg.d, xis)
    full = sphere_axis_values(cfg.d, xis)
    h = cfg.sha256()
    rows = [[x, v.real, v.imag, abs(v), s.real, abs(s)] for x, v, s in zip(xis, prof.values, full)]
    write_csv(os.path.join(out, "hemisphere.csv"), ["xi_d", "re", "im", "abs", "sphere_re", "sphere_abs"], rows, h)
    payload = prof.to_dict()
    try:
        payload["zeros"] = decay_phase_fit(xis, prof.values, cfg.d).zeros.tolist()
    except FitError:
        payload["zeros"] = []
    try:
        payload["sphere_envelope_slope"] = decay_phase_fit(xis, full, cfg.d).exponent
    except FitError:
        payload["sphere_envelope_slope"] = None
    if cfg.symmetry_samples > 0:
        rng = np.random.default_rng(cfg.seed)
        v = rng.normal(size=(cfg.symmetry_samples, cfg.d))
        v *= rng.uniform(0, cfg.symmetry_radius, (len(v), 1)) / np.linalg.norm(v, axis=1, keepdims=True)
        payload["symmetry_max_deviation"] = hemisphere_symmetry_check(catalog.hemisphere(cfg.d), v)
    payload["config_sha256"] = h
    write_json(os.path.join(out, "hemisphere.json"), payload)
    _say(f"hemisphere d={cfg.d}: slope {prof.slope:.4f}, xi|value| in [{prof.scaled_min:.4g}, {prof.scaled_max:.4g}]")
    return EXIT_OK


def cmd_coverage(cfg, out):
    surface, window = _load(cfg)
    if cfg.region == "window" and window is None:
        raise UsageError("region 'window' needs a window spec")
    region = window if cfg.region == "window" else None
    try:
        rep = normal_cone_coverage(surface, region, cfg.angular_resolution, cfg.angular_tol)
    except SurfaceError as exc:
        raise UsageError(str(exc)) from None
    h = cfg.sha256()
    header = [f"e_{i + 1}" for i in range(surface.d)] + ["member", "nearest_angle", "weight"]
    rows = [r + [float(w)] for r, w in zip(rep.rows(), rep.weights)]
    write_csv(os.path.join(out, "coverage.csv"), header, rows, h)
    write_json(os.path.join(out, "coverage.json"), {"fraction": rep.fraction, "resolution": rep.resolution,
                                                    "directions": int(len(rep.directions)),
                                                    "uncovered": int((~rep.member).sum()), "config_sha256": h})
    _say(f"coverage {surface.name}: fraction {rep.fraction:.4f}")
    return EXIT_OK


def cmd_frame(cfg, out):
    surface, window = _load(cfg)
    try:
        lam = generate_spectrum(cfg.spectrum, surface.d)
        H = generate_spectrum(cfg.H, surface.d)
    except (SpectrumError, KeyError) as exc:
        raise UsageError(f"bad spectrum: {exc}") from None
    h = cfg.sha256()
    write_csv(os.path.join(out, "spectrum.csv"), [f"lambda_{i + 1}" for i in range(surface.d)], lam.points, h)
    try:
        est = frame_bounds_estimate(surface, window, lam, H.points, max_cond=cfg.max_cond)
    except FrameError as exc:
        write_json(os.path.join(out, "frame.json"), {"error": str(exc), "cond_G": exc.cond, "config_sha256": h})
        _say(f"frame {surface.name}: refused ({exc})")
        return EXIT_FAILED
    payload = dict(est.to_dict(), config_sha256=h)
    if cfg.partial_sum_radii:
        payload["partial_sums"] = divergence_partial_sum(lam, surface.d, cfg.partial_sum_radii).to_dict()
    write_json(os.path.join(out, "frame.json"), payload)
    _say(f"frame {surface.name}: alpha_min {est.alpha_min:.6g}, alpha_max {est.alpha_max:.6g}, cond_G {est.cond_G:.3g}")
    return EXIT_OK


def cmd_verify(suite, out, only=None):
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {list(SUITES)}")
    results = run_suite(suite, only=only, echo=_say)
    passed = all(r.passed for r in results)
    summary = {"suite": suite, "passed": passed, "criteria": [r.to_dict() for r in results]}
    if out:
        write_json(os.path.join(out, f"verify_{suite}.json"), summary)
    _say(json.dumps({"suite": suite, "passed": passed,
                     "failed": [r.number for r in results if not r.passed]}))
    return EXIT_OK if passed else EXIT_FAILED


COMMANDS = {
    "surface-info": cmd_surface_info,
    "ft-scan": cmd_ft_scan,
    "sp-compare": cmd_sp_compare,
    "hemisphere": cmd_hemisphere,
    "coverage": cmd_coverage,
    "frame": cmd_frame,
}


def build_parser():
    p = _Parser(prog="curveft", description="Fourier analysis of curved surface measures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON experiment config")
        s.add_argument("--out", default=".", help="output directory")
    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--suite", default="fast")
    v.add_argument("--out", default=None)
    v.add_argument("--only", type=int, nargs="*", default=None, help="criterion numbers")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.out, args.only)
        cfg = load_config(args.command, args.config)
        return COMMANDS[args.command](cfg, args.out)
    except (UsageError, ConfigError) as exc:
        print(f"curveft: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
