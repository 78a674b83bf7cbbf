"""Trajectory datasets: generation, distance statistics, and persistence.

A dataset is M trajectories observed on a shared uniform time grid,
together with the kernel it was generated from.  On disk it is one
metadata.json plus one CSV per trajectory with columns (l, t, i, x1..xd),
all floats printed with %.17g so a round trip is bit-exact.
"""

from __future__ import annotations

import json
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .deterministic import DeterministicRunConfig, simulate
from .kernels import Cutoff, Epsilon, KernelSpec, NumericError
from .stochastic import StochasticRunConfig, simulate_sde

FORMAT_VERSION = 1


def initial_generator(seed: int, traj_index: int) -> np.random.Generator:
    """Philox stream for the initial configuration of one trajectory."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(traj_index, 0))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class TrajectoryDataset:
    """M x (L+1) x N x d observed positions plus generation metadata."""

    frames: np.ndarray
    times: np.ndarray
    mode: str  # "deterministic" | "stochastic"
    kernel: KernelSpec
    tau: float
    eta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        if self.frames.ndim != 4:
            raise ValueError(f"frames must be (M, L+1, N, d), got {self.frames.shape}")
        if self.mode not in ("deterministic", "stochastic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        M, n_frames, N, d = self.frames.shape
        if M < 1 or n_frames < 2 or N < 2:
            raise ValueError("need M >= 1, L >= 1, N >= 2")
        if self.times.shape != (n_frames,):
            raise ValueError("times must have one entry per frame")
        steps = np.diff(self.times)
        if np.any(steps <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > 1.0e-9 * steps[0]:
            raise ValueError("observation times must be uniform")
        if d != self.kernel.d:
            raise ValueError(
                f"frame dimension {d} does not match kernel dimension {self.kernel.d}"
            )
        if not np.all(np.isfinite(self.frames)):
            raise NumericError("non-finite coordinates in trajectory data")

    @property
    def M(self) -> int:
        return self.frames.shape[0]

    @property
    def L(self) -> int:
        return self.frames.shape[1] - 1

    @property
    def N(self) -> int:
        return self.frames.shape[2]

    @property
    def d(self) -> int:
        return self.frames.shape[3]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def distance_range(self) -> tuple[float, float]:
        """Min and max pairwise distance over every frame of every trajectory."""
        iu, ju = np.triu_indices(self.N, k=1)
        lo = np.inf
        hi = -np.inf
        for m in range(self.M):
            diff = self.frames[m, :, iu, :] - self.frames[m, :, ju, :]
            r = np.sqrt(np.sum(diff * diff, axis=-1))
            lo = min(lo, float(r.min()))
            hi = max(hi, float(r.max()))
        return lo, hi

    def pairwise_histogram(self, edges: np.ndarray) -> np.ndarray:
        """Counts of all (m, l, i<j) pairwise distances in the given bins."""
        iu, ju = np.triu_indices(self.N, k=1)
        counts = np.zeros(edges.size - 1, dtype=float)
        for m in range(self.M):
            diff = self.frames[m, :, iu, :] - self.frames[m, :, ju, :]
            r = np.sqrt(np.sum(diff * diff, axis=-1))
            counts += np.histogram(r.ravel(), bins=edges)[0]
        return counts


def _generate_one(args) -> np.ndarray:
    mode, kernel, T, tau, dt_obs, eta, seed, N, m = args
    x0 = initial_generator(seed, m).random((N, kernel.d))
    if mode == "deterministic":
        run = DeterministicRunConfig(kernel=kernel, T=T, tau=tau, dt_obs=dt_obs)
        return simulate(x0, run)
    run = StochasticRunConfig(
        kernel=kernel, T=T, tau=tau, dt_obs=dt_obs, eta=eta, seed=seed
    )
    return simulate_sde(x0, run, traj_index=m)


def generate_dataset(
    mode: str,
    kernel: KernelSpec,
    N: int,
    M: int,
    T: float,
    tau: float = 1.0e-4,
    dt_obs: float = 0.01,
    eta: float = 0.01,
    seed: int = 0,
    workers: int = 1,
) -> TrajectoryDataset:
    """Simulate M trajectories from uniform-[0,1]^d initial configurations.

    Each trajectory is fully determined by (seed, trajectory index), so the
    result is identical for any worker count.
    """
    args = [(mode, kernel, T, tau, dt_obs, eta, seed, N, m) for m in range(M)]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            trajs = pool.map(_generate_one, args)
    else:
        trajs = [_generate_one(a) for a in args]
    frames = np.stack(trajs)
    n_obs = frames.shape[1] - 1
    times = dt_obs * np.arange(n_obs + 1)
    return TrajectoryDataset(
        frames=frames,
        times=times,
        mode=mode,
        kernel=kernel,
        tau=tau,
        eta=eta if mode == "stochastic" else 0.0,
        seed=seed,
    )


# --- persistence --------------------------------------------------------------


def _kernel_to_dict(kernel: KernelSpec) -> dict:
    if isinstance(kernel.reg, Cutoff):
        reg = {"kind": "cutoff", "value": kernel.reg.r_c}
    else:
        reg = {"kind": "epsilon", "value": kernel.reg.eps}
    return {"d": kernel.d, "chi": kernel.chi, "reg": reg, "m": kernel.m, "h": kernel.h}


def _kernel_from_dict(data: dict) -> KernelSpec:
    reg = data["reg"]
    regobj = Cutoff(reg["value"]) if reg["kind"] == "cutoff" else Epsilon(reg["value"])
    return KernelSpec(
        d=int(data["d"]), chi=float(data["chi"]), reg=regobj,
        m=int(data["m"]), h=float(data["h"]),
    )


def _traj_filename(m: int) -> str:
    return f"traj_{m:04d}.csv"


def save_dataset(ds: TrajectoryDataset, out_dir, config_echo: dict | None = None):
    """Write metadata.json plus one CSV per trajectory into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    a, b = ds.distance_range()
    meta = {
        "format_version": FORMAT_VERSION,
        "mode": ds.mode,
        "M": ds.M,
        "N": ds.N,
        "L": ds.L,
        "d": ds.d,
        "times": [float(t) for t in ds.times],
        "kernel": _kernel_to_dict(ds.kernel),
        "tau": ds.tau,
        "eta": ds.eta,
        "seed": ds.seed,
        "distance_range": [a, b],
    }
    if config_echo is not None:
        meta["config"] = config_echo
    with open(out / "metadata.json", "w") as f:
        json.dump(meta, f, indent=2)
    cols = ",".join(f"x{q + 1}" for q in range(ds.d))
    for m in range(ds.M):
        lines = [f"l,t,i,{cols}"]
        for l, t in enumerate(ds.times):
            for i in range(ds.N):
                coords = ",".join(f"{v:.17g}" for v in ds.frames[m, l, i])
                lines.append(f"{l},{t:.17g},{i},{coords}")
        (out / _traj_filename(m)).write_text("\n".join(lines) + "\n")


def load_dataset(in_dir) -> TrajectoryDataset:
    """Read a dataset written by save_dataset."""
    src = Path(in_dir)
    meta_path = src / "metadata.json"
    if not meta_path.is_file():
        raise FileNotFoundError(f"no dataset metadata at {meta_path}")
    meta = json.loads(meta_path.read_text())
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset format: {meta.get('format_version')}")
    M, N, L, d = meta["M"], meta["N"], meta["L"], meta["d"]
    frames = np.empty((M, L + 1, N, d))
    for m in range(M):
        raw = np.loadtxt(src / _traj_filename(m), delimiter=",", skiprows=1, ndmin=2)
        if raw.shape != ((L + 1) * N, 3 + d):
            raise ValueError(f"trajectory file {m} has shape {raw.shape}")
        frames[m] = raw[:, 3:].reshape(L + 1, N, d)
    return TrajectoryDataset(
        frames=frames,
        times=np.asarray(meta["times"], dtype=float),
        mode=meta["mode"],
        kernel=_kernel_from_dict(meta["kernel"]),
        tau=float(meta["tau"]),
        eta=float(meta["eta"]),
        seed=int(meta["seed"]),
    )
