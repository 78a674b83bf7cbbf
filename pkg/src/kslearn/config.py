"""Experiment configuration and the preset sweeps.

Defaults mirror the common parameter set used by all experiments:
T = 0.2, dt_obs = 0.01, tau = 1e-4, N = 50, M = 500, P = 400, h = 0.01,
adaptive tol = 0.01 with maxIter = 6, eta = 0.01, eps = 0.01.
The "desk" scale shrinks that to M = 50, N = 20, T = 0.1 for runs that
finish in seconds; "mini" is a smoke-test size.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .kernels import Cutoff, Epsilon, KernelSpec


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass
class BasisSpec:
    """Breakpoint layout for the learner: uniform count or adaptive search."""

    kind: str = "uniform"  # "uniform" | "adaptive"
    count: int = 30
    tol: float = 0.01
    max_iter: int = 6
    initial_count: int = 8
    budget: int | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "adaptive"):
            raise ConfigError(f"unknown basis kind {self.kind!r}")
        if self.count < 2 or self.initial_count < 2:
            raise ConfigError("breakpoint counts must be >= 2")
        if self.tol <= 0.0 or self.max_iter < 1:
            raise ConfigError("need tol > 0 and max_iter >= 1")


@dataclass
class ExperimentConfig:
    mode: str = "deterministic"  # "deterministic" | "stochastic"
    d: int = 2
    chi: float = 1.0
    r_c: float | None = 0.05
    eps: float | None = None
    h: float = 0.01
    m: int = 1
    N: int = 50
    M: int = 500
    T: float = 0.2
    dt_obs: float = 0.01
    tau: float = 1.0e-4
    eta: float = 0.01
    P: int = 400
    basis: BasisSpec = field(default_factory=BasisSpec)
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("deterministic", "stochastic"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "deterministic" and self.r_c is None:
            raise ConfigError("deterministic mode needs r_c")
        if self.mode == "stochastic" and self.eps is None:
            self.eps = 0.01
        if self.N < 2 or self.M < 1:
            raise ConfigError("need N >= 2 and M >= 1")
        if self.P < 1:
            raise ConfigError("need P >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")

    def kernel(self) -> KernelSpec:
        try:
            if self.mode == "deterministic":
                reg = Cutoff(self.r_c)
            else:
                reg = Epsilon(self.eps)
            return KernelSpec(d=self.d, chi=self.chi, reg=reg, m=self.m, h=self.h)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    basis = data.pop("basis", None)
    try:
        cfg = ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    if basis is not None:
        if not isinstance(basis, dict):
            raise ConfigError("basis must be an object")
        try:
            cfg.basis = BasisSpec(**basis)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
    cfg.kernel()  # validate kernel parameters eagerly
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(data)


def save_config(cfg: ExperimentConfig, path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def resolve_out_dir(path) -> Path:
    """Relative output paths may be redirected by KSLEARN_OUT_ROOT."""
    p = Path(path)
    root = os.environ.get("KSLEARN_OUT_ROOT")
    if root and not p.is_absolute():
        return Path(root) / p
    return p


# --- presets -------------------------------------------------------------------

SCALES = {
    "full": dict(M=500, N=50, T=0.2),
    "desk": dict(M=50, N=20, T=0.1),
    "mini": dict(M=4, N=8, T=0.02),
}

PRESETS = {
    "1d": dict(mode="deterministic", d=1, r_c=0.01, knots=30, chis=(0.35, 0.55, 0.75)),
    "2d": dict(mode="deterministic", d=2, r_c=0.05, knots=20, chis=(1.0, 2.0, 4.0)),
    "3d": dict(mode="deterministic", d=3, r_c=0.05, knots=25, chis=(1.0, 2.0, 4.0)),
    "4d": dict(mode="deterministic", d=4, r_c=0.05, knots=30, chis=(1.0,)),
    "s2d": dict(mode="stochastic", d=2, eps=0.01, knots=30, chis=(1.0, 2.0, 4.0)),
}

# full-scale reference errors (traj, profile) per preset and chi
REFERENCE_ERRORS = {
    "1d": {0.35: (3.94e-4, 0.096), 0.55: (3.55e-4, 0.116), 0.75: (3.35e-4, 0.207)},
    "2d": {1.0: (5.89e-3, 4.77e-2), 2.0: (3.16e-4, 5.96e-2), 4.0: (5.96e-4, 6.96e-2)},
    "3d": {1.0: (6.41e-4, 0.105), 2.0: (1.43e-3, 0.103), 4.0: (3.21e-3, 0.072)},
    "4d": {1.0: (1.44e-3, 6.88e-2)},
    "s2d": {1.0: (4.29e-4, 0.233), 2.0: (6.92e-4, 0.234), 4.0: (3.35e-3, 0.380)},
}


def preset_config(table: str, chi: float, scale: str = "full", seed: int = 0) -> ExperimentConfig:
    """Experiment configuration for one sweep entry of a preset table."""
    if table not in PRESETS:
        raise ConfigError(f"unknown table {table!r}; choose from {sorted(PRESETS)}")
    if scale not in SCALES:
        raise ConfigError(f"unknown scale {scale!r}; choose from {sorted(SCALES)}")
    p = PRESETS[table]
    s = SCALES[scale]
    return ExperimentConfig(
        mode=p["mode"],
        d=p["d"],
        chi=chi,
        r_c=p.get("r_c"),
        eps=p.get("eps"),
        N=s["N"],
        M=s["M"],
        T=s["T"],
        basis=BasisSpec(kind="uniform", count=p["knots"]),
        seed=seed,
    )
