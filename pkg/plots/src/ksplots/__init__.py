"""Figure rendering for kslearn experiment outputs."""

from .io import SchemaError, SplineCurve, read_density, read_model, read_profile_curve, read_report, read_trajectory
from .render import FigureSpec, adaptive_compare, profile_overlay, render, trajectory_fan

__all__ = [
    "FigureSpec",
    "SchemaError",
    "SplineCurve",
    "adaptive_compare",
    "profile_overlay",
    "read_density",
    "read_model",
    "read_profile_curve",
    "read_report",
    "read_trajectory",
    "render",
    "trajectory_fan",
]
__version__ = "0.1.0"
