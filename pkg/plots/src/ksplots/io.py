"""Readers for the kslearn output files.

These parse the documented exchange formats only (CSV bundles, model
JSON, report JSON); nothing here imports the simulation package.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.interpolate import BSpline


class SchemaError(ValueError):
    """An input file does not match the documented schema."""


def _read_csv(path, expected_header):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"missing input file: {p}")
    lines = p.read_text().strip().split("\n")
    if not lines or lines[0] != expected_header:
        raise SchemaError(
            f"{p}: expected header {expected_header!r}, got {lines[0][:80]!r}"
        )
    try:
        data = np.array([[float(v) for v in row.split(",")] for row in lines[1:]])
    except ValueError as exc:
        raise SchemaError(f"{p}: non-numeric row ({exc})") from exc
    if data.ndim != 2 or data.shape[0] == 0:
        raise SchemaError(f"{p}: no data rows")
    return data


def read_profile_curve(path):
    """profile_curve.csv -> (r, phi_true, phi_learned)."""
    data = _read_csv(path, "r,phi_true,phi_learned")
    return data[:, 0], data[:, 1], data[:, 2]


def read_density(path):
    """density.csv -> (edges, masses); bins must tile an interval."""
    data = _read_csv(path, "r_left,r_right,mass")
    left, right, mass = data[:, 0], data[:, 1], data[:, 2]
    if not np.allclose(left[1:], right[:-1], rtol=0, atol=1e-12 * max(1.0, right[-1])):
        raise SchemaError(f"{path}: density bins do not tile an interval")
    return np.append(left, right[-1]), mass


def read_trajectory(path):
    """trajectory CSV (l,t,i,x1..xd) -> (times (L+1,), frames (L+1, N, d))."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"missing input file: {p}")
    lines = p.read_text().strip().split("\n")
    header = lines[0].split(",")
    if header[:3] != ["l", "t", "i"] or not all(
        c == f"x{k + 1}" for k, c in enumerate(header[3:])
    ):
        raise SchemaError(f"{p}: unexpected trajectory header {lines[0]!r}")
    d = len(header) - 3
    if d == 0:
        raise SchemaError(f"{p}: no coordinate columns")
    data = np.array([[float(v) for v in row.split(",")] for row in lines[1:]])
    ls = data[:, 0].astype(int)
    n_frames = ls.max() + 1
    n_particles = data.shape[0] // n_frames
    if n_frames * n_particles != data.shape[0]:
        raise SchemaError(f"{p}: ragged trajectory table")
    frames = data[:, 3:].reshape(n_frames, n_particles, d)
    times = data[::n_particles, 1]
    return times, frames


def read_report(path):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"missing input file: {p}")
    report = json.loads(p.read_text())
    if not isinstance(report, dict) or "r_c_or_eps" not in report:
        raise SchemaError(f"{p}: not a report file (missing r_c_or_eps)")
    return report


class SplineCurve:
    """Clamped B-spline loaded from the canonical model JSON."""

    def __init__(self, breakpoints, degree, coefficients):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.degree = int(degree)
        self.coefficients = np.asarray(coefficients, dtype=float)
        if self.breakpoints.size < 2 or np.any(np.diff(self.breakpoints) <= 0):
            raise SchemaError("model breakpoints must be strictly increasing")
        n = self.breakpoints.size - 1 + self.degree
        if self.coefficients.shape != (n,):
            raise SchemaError(
                f"model needs {n} coefficients, has {self.coefficients.size}"
            )
        k = self.degree
        t = np.concatenate([
            np.full(k, self.breakpoints[0]),
            self.breakpoints,
            np.full(k, self.breakpoints[-1]),
        ])
        self._spline = BSpline(t, self.coefficients, k, extrapolate=False)

    @property
    def a(self):
        return float(self.breakpoints[0])

    @property
    def b(self):
        return float(self.breakpoints[-1])

    def __call__(self, r):
        return self._spline(np.clip(r, self.a, self.b))


def read_model(path):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"missing input file: {p}")
    data = json.loads(p.read_text())
    if not isinstance(data, dict) or "breakpoints" not in data:
        raise SchemaError(f"{p}: not a spline model file")
    return SplineCurve(data["breakpoints"], data["degree"], data["coefficients"])
