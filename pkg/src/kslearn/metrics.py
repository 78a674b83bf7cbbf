"""Error measures: pairwise-distance density, trajectory and profile errors.

The profile error is a relative L2 norm weighted by the empirical density
of pairwise distances and by r^2 (the profile always acts through
phi(r) * r), evaluated with a midpoint rule on the histogram bins.
Trajectory errors compare a reconstruction against its reference dataset
frame by frame, excluding the shared initial frame.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

import numpy as np

from .bspline import SplineModel, SplineProfile, eval_spline
from .data import TrajectoryDataset
from .deterministic import DeterministicRunConfig, simulate
from .kernels import truth_profile
from .stochastic import StochasticRunConfig, simulate_sde

DEFAULT_BINS = 400


@dataclass(frozen=True)
class EmpiricalDensity:
    """Normalized histogram of pairwise distances on [a, b]."""

    edges: np.ndarray  # P + 1 uniform edges
    weights: np.ndarray  # P masses summing to 1

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if e.ndim != 1 or e.size < 2 or w.shape != (e.size - 1,):
            raise ValueError("need P+1 edges and P weights")
        if np.any(w < 0.0):
            raise ValueError("bin masses must be nonnegative")
        if abs(w.sum() - 1.0) > 1.0e-12:
            raise ValueError(f"bin masses must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "weights", w)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def pairwise_density(dataset: TrajectoryDataset, P: int = DEFAULT_BINS) -> EmpiricalDensity:
    """Histogram of all (m, l, i<j) distances over the observed range.

    A degenerate range (all distances equal) is widened symmetrically by
    a machine-scale margin so the single point mass lands in one bin.
    """
    if P < 1:
        raise ValueError(f"need at least one bin, got {P}")
    a, b = dataset.distance_range()
    if b - a <= 1.0e-12 * max(1.0, abs(a)):
        margin = 1.0e-8 * max(1.0, abs(a))
        a, b = a - margin, b + margin
    edges = np.linspace(a, b, P + 1)
    counts = dataset.pairwise_histogram(edges)
    return EmpiricalDensity(edges=edges, weights=counts / counts.sum())


def _traj_functional(diff_frames: np.ndarray, dt: float) -> np.ndarray:
    # per-trajectory sqrt( sum_l dt * (1/N) sum_i |.|^2 ) over frames 1..L
    sq = np.sum(diff_frames[:, 1:] ** 2, axis=(2, 3)) / diff_frames.shape[2]
    return np.sqrt(np.sum(sq * dt, axis=1))


def traj_error_rel(reference: TrajectoryDataset, reconstructed: TrajectoryDataset) -> float:
    """Relative trajectory error between a dataset and its reconstruction."""
    if reference.frames.shape != reconstructed.frames.shape:
        raise ValueError(
            f"shape mismatch: {reference.frames.shape} vs {reconstructed.frames.shape}"
        )
    if not np.allclose(reference.times, reconstructed.times, rtol=1.0e-12, atol=0.0):
        raise ValueError("observation times differ")
    dt = reference.dt
    num = np.mean(_traj_functional(reconstructed.frames - reference.frames, dt))
    den = np.mean(_traj_functional(reference.frames, dt))
    if den == 0.0:
        raise ValueError("reference trajectories are identically zero")
    return float(num / den)


def profile_error_rel(truth, learned, density: EmpiricalDensity) -> float:
    """Relative L2(rho) error of the learned profile, weighted by r^2.

    `truth` is a callable phi(r); `learned` is a SplineModel or callable.
    Both are evaluated at the histogram bin centers (midpoint quadrature).
    """
    r = density.centers
    w = density.weights
    t = np.asarray(truth(r), dtype=float)
    if isinstance(learned, SplineModel):
        v = np.asarray(eval_spline(learned, r), dtype=float)
    else:
        v = np.asarray(learned(r), dtype=float)
    den = np.sum(w * r * r * t * t)
    if den == 0.0:
        raise ValueError("truth profile vanishes on the data distribution")
    num = np.sum(w * r * r * (t - v) ** 2)
    return float(np.sqrt(num / den))


def as_profile(model_or_profile):
    """Wrap a SplineModel as a simulation-ready profile; pass others through."""
    if isinstance(model_or_profile, SplineModel):
        return SplineProfile(model_or_profile)
    return model_or_profile


def _reconstruct_one(args):
    run, x0, m, prof = args
    if isinstance(run, DeterministicRunConfig):
        return simulate(x0, run, profile=prof)
    return simulate_sde(x0, run, traj_index=m, profile=prof)


def reconstruct(
    dataset: TrajectoryDataset, model_or_profile, workers: int = 1
) -> TrajectoryDataset:
    """Re-simulate every trajectory with a substituted profile.

    Uses the dataset's own initial frames, time step, and kernel; in
    stochastic mode the reference noise streams are reused (common random
    numbers) so the comparison isolates the drift.  Trajectories are
    independent, so the result does not depend on the worker count.
    """
    prof = as_profile(model_or_profile)
    T = float(dataset.times[-1] - dataset.times[0])
    if dataset.mode == "deterministic":
        run = DeterministicRunConfig(
            kernel=dataset.kernel, T=T, tau=dataset.tau, dt_obs=dataset.dt
        )
    else:
        run = StochasticRunConfig(
            kernel=dataset.kernel,
            T=T,
            tau=dataset.tau,
            dt_obs=dataset.dt,
            eta=dataset.eta,
            seed=dataset.seed,
        )
    args = [(run, dataset.frames[m, 0], m, prof) for m in range(dataset.M)]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            trajs = pool.map(_reconstruct_one, args)
    else:
        trajs = [_reconstruct_one(a) for a in args]
    return TrajectoryDataset(
        frames=np.stack(trajs),
        times=dataset.times.copy(),
        mode=dataset.mode,
        kernel=dataset.kernel,
        tau=dataset.tau,
        eta=dataset.eta,
        seed=dataset.seed,
    )


def error_report(
    dataset: TrajectoryDataset,
    model_or_profile,
    P: int = DEFAULT_BINS,
    n_breakpoints: int | None = None,
    workers: int = 1,
    recon: TrajectoryDataset | None = None,
) -> dict:
    """Both error measures plus run metadata, JSON-ready.

    Pass a precomputed `recon` to avoid re-simulating the reconstruction.
    """
    density = pairwise_density(dataset, P)
    truth = truth_profile(dataset.kernel)
    if isinstance(model_or_profile, SplineModel):
        learned = model_or_profile
        if n_breakpoints is None:
            n_breakpoints = model_or_profile.partition.breakpoints.size
    else:
        learned = model_or_profile.phi
    profile_err = profile_error_rel(truth.phi, learned, density)
    if recon is None:
        recon = reconstruct(dataset, model_or_profile, workers=workers)
    traj_err = traj_error_rel(dataset, recon)
    reg = dataset.kernel.reg
    return {
        "traj_err_rel": traj_err,
        "profile_err_rel": profile_err,
        "chi": dataset.kernel.chi,
        "d": dataset.kernel.d,
        "mode": dataset.mode,
        "n_breakpoints": n_breakpoints,
        "r_c_or_eps": getattr(reg, "r_c", None) or getattr(reg, "eps", None),
    }
