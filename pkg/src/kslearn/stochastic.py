"""Euler-Maruyama trajectories of the 2-d stochastic particle system.

The drift is the epsilon-regularized pairwise attraction; the noise is
sqrt(2) * eta * dB per particle.  Every trajectory draws its Gaussian
increments from a counter-based Philox stream keyed by (seed, trajectory
index), so datasets are bit-reproducible regardless of how many workers
generate them, and reconstructions can share the reference noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import Epsilon, KernelSpec, NumericError, truth_profile


def noise_generator(seed: int, traj_index: int) -> np.random.Generator:
    """Philox stream for the Brownian increments of one trajectory."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(traj_index, 1))
    return np.random.Generator(np.random.Philox(ss))


def drift(positions, kernel) -> np.ndarray:
    """Pairwise drift (1/N) sum_j phi(r_ij) (x_j - x_i).

    `kernel` may be a KernelSpec (its regularized truth profile is used)
    or any profile object with a vectorized phi(r).  Coincident pairs
    contribute zero.
    """
    x = np.asarray(positions, dtype=float)
    n = x.shape[0]
    prof = kernel if hasattr(kernel, "phi") else truth_profile(kernel)
    diff = x[None, :, :] - x[:, None, :]  # diff[i, j] = x_j - x_i
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    p = np.asarray(prof.phi(r), dtype=float)
    np.fill_diagonal(p, 0.0)
    return np.einsum("ij,ijq->iq", p, diff) / n


@dataclass(frozen=True)
class StochasticRunConfig:
    """Time grid, noise scale, and seed for one stochastic trajectory."""

    kernel: KernelSpec
    T: float
    tau: float = 1.0e-4
    dt_obs: float = 0.01
    eta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.kernel.reg, Epsilon):
            raise ValueError("stochastic runs use an epsilon-regularized kernel")
        if self.kernel.d != 2:
            raise ValueError("the built-in stochastic kernel is two-dimensional")
        if self.eta < 0.0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        if not (self.tau > 0.0 and self.dt_obs > 0.0 and self.T >= 0.0):
            raise ValueError("need tau > 0, dt_obs > 0, T >= 0")
        if self.tau > self.dt_obs or (self.T > 0.0 and self.dt_obs > self.T):
            raise ValueError("need tau <= dt_obs <= T")
        for num, den in ((self.dt_obs, self.tau), (self.T, self.dt_obs)):
            ratio = num / den
            if abs(ratio - round(ratio)) > 1.0e-9 * max(ratio, 1.0):
                raise ValueError(f"{num}/{den} is not an integer number of steps")

    @property
    def steps_per_obs(self) -> int:
        return round(self.dt_obs / self.tau)

    @property
    def n_obs(self) -> int:
        return round(self.T / self.dt_obs)

    @property
    def times(self) -> np.ndarray:
        return self.dt_obs * np.arange(self.n_obs + 1)


def em_step(positions, run: StochasticRunConfig, noise, profile=None) -> np.ndarray:
    """One Euler-Maruyama step: x + drift * tau + sqrt(2 tau) * eta * noise."""
    x = np.asarray(positions, dtype=float)
    xi = np.asarray(noise, dtype=float)
    if xi.shape != x.shape:
        raise ValueError(f"noise shape {xi.shape} != positions shape {x.shape}")
    prof = truth_profile(run.kernel) if profile is None else profile
    return x + drift(x, prof) * run.tau + np.sqrt(2.0 * run.tau) * run.eta * xi


def simulate_sde(
    initial, run: StochasticRunConfig, traj_index: int = 0, profile=None
) -> np.ndarray:
    """Euler-Maruyama trajectory observed at t = 0, dt_obs, ..., T.

    The Gaussian increments come from noise_generator(run.seed, traj_index)
    in step order, so the same (seed, traj_index) always reproduces the
    same path -- including when a learned profile is substituted for the
    truth, which shares the reference noise realizations.
    """
    x = np.ascontiguousarray(initial, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"positions must be (N, d), got shape {x.shape}")
    prof = truth_profile(run.kernel) if profile is None else profile
    rng = noise_generator(run.seed, traj_index)
    frames = np.empty((run.n_obs + 1,) + x.shape)
    frames[0] = x
    scale = np.sqrt(2.0 * run.tau) * run.eta
    for ob in range(run.n_obs):
        for _ in range(run.steps_per_obs):
            xi = rng.standard_normal(x.shape)
            x = x + drift(x, prof) * run.tau + scale * xi
        if not np.all(np.isfinite(x)):
            raise NumericError(f"non-finite particle state at observation {ob + 1}")
        frames[ob + 1] = x
    return frames
