"""Particle simulators for chemotaxis models and learning of the radial
interaction profile from trajectory data."""

from .adaptive import RefinementResult, midpoint_refine, refine
from .bspline import (
    Partition,
    SplineModel,
    SplineProfile,
    clamped_knots,
    eval_basis,
    eval_spline,
    model_from_dict,
    model_to_dict,
    uniform_partition,
)
from .config import BasisSpec, ConfigError, ExperimentConfig, load_config, preset_config
from .data import TrajectoryDataset, generate_dataset, load_dataset, save_dataset
from .deterministic import (
    DeterministicRunConfig,
    ImplicitStepWarning,
    energy,
    energy_grad,
    implicit_step,
    simulate,
)
from .kernels import (
    Cutoff,
    CutoffProfile,
    Epsilon,
    EpsilonProfile,
    KernelSpec,
    NumericError,
    mollifier,
    mollifier_grad,
    profile_cutoff,
    profile_epsilon,
    profile_true,
    surface_area,
    truth_profile,
)
from .learner import ConditioningWarning, LinearSystem, assemble, diffusion_correction, learn, solve
from .metrics import (
    EmpiricalDensity,
    error_report,
    pairwise_density,
    profile_error_rel,
    reconstruct,
    traj_error_rel,
)
from .stochastic import StochasticRunConfig, drift, em_step, simulate_sde

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
