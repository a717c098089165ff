"""Fourier transforms of curved surface measures, stationary phase and frame diagnostics."""

from .catalog import (bump_window, cap_graph, circle, doubled, figure1_curve, hemisphere, load_document,
                      revolution_surface, sphere, spherical_cap)
from .differential_geometry import (normal_cone_coverage, normal_cone_membership, shape_data,
                                    stationary_points)
from .frame_diagnostics import (divergence_partial_sum, energy_scan, frame_bounds_estimate,
                                generate_spectrum)
from .oscillatory_fourier import ft_point, ft_scan, stationary_phase_eval
from .surface_model import Chart, Surface, Window, total_mass, validate_surface

__version__ = "0.1.0"

__all__ = [
    "Chart", "Surface", "Window", "bump_window", "cap_graph", "circle", "divergence_partial_sum", "doubled",
    "energy_scan", "figure1_curve", "frame_bounds_estimate", "ft_point", "ft_scan", "generate_spectrum",
    "hemisphere", "load_document", "normal_cone_coverage", "normal_cone_membership", "revolution_surface",
    "shape_data", "sphere", "spherical_cap", "stationary_phase_eval", "stationary_points", "total_mass",
    "validate_surface",
]
