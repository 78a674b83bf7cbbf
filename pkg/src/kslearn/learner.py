"""Least-squares learning of the radial profile from trajectory data.

The quadratic trajectory-matching loss over a B-spline basis reduces to
a symmetric positive semidefinite normal system A alpha = b.  Per frame
and particle, with vec_ij = x_j - x_i and r_ij = |vec_ij|,

    G_eta(i) = sum_j psi_eta(r_ij) vec_ij,
    A[eta, eta'] += <G_eta(i), G_eta'(i)>,
    b[eta]      += <dx_i - f_D(x_i) dt, G_eta(i)>,

summed over trajectories m and forward differences l, then scaled by
dt/(n_diff M N^3) and 1/(n_diff M N^2) respectively.  The second inner
sum of A runs over its own pair index (Gram structure), and the drift
correction f_D follows the variational derivation of the diffusion term:
it is applied for deterministic data and is the zero field for
stochastic data.

The first forward difference (t_0 -> t_1) of deterministic datasets is
excluded by default: the raw initial draw is a sample of the continuum
initial condition, not a state of the regularized particle dynamics, and
its mollifier equilibration within the first observation interval is
stiff on the tau scale.  Including it injects drift targets that are
inconsistent with the instantaneous force field and ruins the profile
estimate (orders of magnitude in the weighted error); excluding it
restores the expected accuracy.  Stochastic datasets have no such
equilibration layer, so all differences are used there.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from . import _core
from .bspline import Partition, SplineModel, clamped_knots
from .data import TrajectoryDataset
from .kernels import KernelSpec, NumericError

TINY_DENOMINATOR = 1.0e-290


class ConditioningWarning(UserWarning):
    """The normal system needed Tikhonov stabilization."""


@dataclass(frozen=True)
class LinearSystem:
    """Normal system of the quadratic loss (the constant term is dropped)."""

    A: np.ndarray
    b: np.ndarray

    def loss(self, alpha: np.ndarray) -> float:
        """Quadratic loss value 0.5 a'Aa - b'a at the given coefficients."""
        alpha = np.asarray(alpha, dtype=float)
        return float(0.5 * alpha @ self.A @ alpha - self.b @ alpha)


def diffusion_correction(positions, kernel: KernelSpec, mode: str = "deterministic"):
    """Drift contribution of the diffusion term at one frame.

    For deterministic data this is the entropy-induced velocity field
    (equal to -(1/w) times the diffusion part of the energy gradient);
    for stochastic data the diffusion lives in the noise, so the field
    is zero.
    """
    x = np.asarray(positions, dtype=float)
    n, d = x.shape
    if mode == "stochastic":
        return np.zeros((n, d))
    h = kernel.h
    diff = x[None, :, :] - x[:, None, :]  # diff[i, j] = x_j - x_i
    r2 = np.sum(diff * diff, axis=-1)
    K = (2.0 * np.pi * h * h) ** (-0.5 * d) * np.exp(-r2 / (2.0 * h * h))
    S = K.sum(axis=1)
    if np.min(S) < TINY_DENOMINATOR:
        i = int(np.argmin(S))
        raise NumericError(f"mollifier denominator underflow at particle {i}")
    # grad K_h(x_i - x_j) = -(x_i - x_j) K / h^2 = diff * K / h^2
    GK = diff * (K / (h * h))[..., None]
    term_other = np.einsum("ijq,j->iq", GK, 1.0 / S)
    term_local = GK.sum(axis=1) / S[:, None]
    return -(term_other + term_local)


def assemble(
    dataset: TrajectoryDataset,
    partition: Partition,
    skip_equilibration: bool | None = None,
) -> LinearSystem:
    """Accumulate the normal system over all (m, l) frame pairs.

    Frames are visited in a fixed order, so assembly is bit-reproducible.
    Raises if the partition does not cover the observed distance range.
    `skip_equilibration` drops the first forward difference (see module
    docstring); it defaults to True for deterministic data and False for
    stochastic data.
    """
    lo, hi = dataset.distance_range()
    slack = 1.0e-9 * max(1.0, abs(partition.b))
    if lo < partition.a - slack or hi > partition.b + slack:
        raise ValueError(
            f"partition [{partition.a}, {partition.b}] does not cover the "
            f"observed pairwise-distance range [{lo}, {hi}]"
        )
    if skip_equilibration is None:
        skip_equilibration = dataset.mode == "deterministic"
    l0 = 1 if (skip_equilibration and dataset.L > 1) else 0
    t = clamped_knots(partition)
    deg = partition.degree
    n = partition.n_basis
    M, L, N = dataset.M, dataset.L, dataset.N
    dt = dataset.dt
    A = np.zeros((n, n))
    b = np.zeros(n)
    for m in range(M):
        for l in range(l0, L):
            x = dataset.frames[m, l]
            diff = x[None, :, :] - x[:, None, :]  # diff[i, j] = x_j - x_i
            r = np.sqrt(np.sum(diff * diff, axis=-1))
            B = _core.design_matrix(t, deg, n, r.ravel()).reshape(N, N, n)
            # G[i, eta, :] = sum_j psi_eta(r_ij) (x_j - x_i); self pairs vanish
            G = np.einsum("ijn,ijq->inq", B, diff)
            A += np.einsum("inq,ipq->np", G, G)
            y = dataset.frames[m, l + 1] - x
            if dataset.mode == "deterministic":
                y = y - dt * diffusion_correction(x, dataset.kernel)
            b += np.einsum("inq,iq->n", G, y)
    n_diff = L - l0
    A *= dt / (M * n_diff * N**3)
    b /= M * n_diff * N**2
    return LinearSystem(A=A, b=b)


def solve(system: LinearSystem) -> np.ndarray:
    """Solve A alpha = b, falling back to Tikhonov when A is not SPD.

    A successful Cholesky solve is accepted at relative residual 1e-10
    (one refinement step is applied if needed).  Otherwise the stabilized
    system (A + lambda I) with lambda = 1e-10 trace(A)/n is solved and a
    ConditioningWarning is emitted.
    """
    A, b = system.A, system.b
    if not np.any(A):
        raise ValueError("empty normal system: no pairwise data in range")
    n = A.shape[0]
    bnorm = np.linalg.norm(b)
    try:
        cf = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
        alpha = scipy.linalg.cho_solve(cf, b, check_finite=False)
        resid = np.linalg.norm(A @ alpha - b)
        if resid > 1.0e-10 * max(bnorm, 1.0e-300):
            alpha = alpha + scipy.linalg.cho_solve(cf, b - A @ alpha, check_finite=False)
            resid = np.linalg.norm(A @ alpha - b)
        if resid <= 1.0e-10 * max(bnorm, 1.0e-300):
            return alpha
    except scipy.linalg.LinAlgError:
        pass
    lam = 1.0e-10 * np.trace(A) / n
    warnings.warn(
        f"normal system is not numerically SPD; solving with Tikhonov "
        f"shift {lam:.3e}",
        ConditioningWarning,
        stacklevel=2,
    )
    return np.linalg.solve(A + lam * np.eye(n), b)


def learn(dataset: TrajectoryDataset, partition: Partition) -> SplineModel:
    """Assemble and solve the normal system; returns the learned profile."""
    system = assemble(dataset, partition)
    return SplineModel(partition, solve(system))


def save_system(system: LinearSystem, path):
    """Diagnostic dump of the normal system as JSON (n, A row-major, b)."""
    payload = {
        "n": int(system.b.size),
        "A": system.A.ravel().tolist(),
        "b": system.b.tolist(),
    }
    Path(path).write_text(json.dumps(payload))
