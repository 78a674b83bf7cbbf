"""Clamped B-spline bases over breakpoint partitions of an interval.

The basis over K intervals (K+1 breakpoints) at degree p has dimension
n = K + p.  Evaluation outside [a, b] clamps the argument to the nearest
endpoint, which extends a learned profile constantly -- the same plateau
behavior the cutoff regularization has near the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core


@dataclass(frozen=True)
class Partition:
    """Strictly increasing breakpoints [a, ..., b] plus a spline degree."""

    breakpoints: np.ndarray
    degree: int = 3

    def __post_init__(self):
        pts = np.asarray(self.breakpoints, dtype=float).copy()
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a partition needs at least two breakpoints")
        if not np.all(np.diff(pts) > 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        pts.flags.writeable = False
        object.__setattr__(self, "breakpoints", pts)

    @property
    def a(self) -> float:
        return float(self.breakpoints[0])

    @property
    def b(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def n_intervals(self) -> int:
        return self.breakpoints.size - 1

    @property
    def n_basis(self) -> int:
        return self.n_intervals + self.degree


def uniform_partition(a: float, b: float, count: int, degree: int = 3) -> Partition:
    """Uniform partition with `count` breakpoints including both endpoints."""
    if count < 2:
        raise ValueError("need at least two breakpoints")
    return Partition(np.linspace(a, b, count), degree)


def clamped_knots(partition: Partition) -> np.ndarray:
    """Knot vector with endpoint knots repeated degree+1 times."""
    p = partition.degree
    pts = partition.breakpoints
    return np.concatenate([np.full(p, pts[0]), pts, np.full(p, pts[-1])])


def eval_basis(partition: Partition, r):
    """All n basis values at r (scalar -> (n,), array -> (len(r), n)).

    Values of r outside [a, b] are clamped to the nearest endpoint.
    """
    t = clamped_knots(partition)
    k = partition.degree
    n = partition.n_basis
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    B = _core.design_matrix(t, k, n, rs.ravel())
    if np.ndim(r) == 0:
        return B[0]
    return B.reshape(rs.shape + (n,))


@dataclass(frozen=True)
class SplineModel:
    """A spline profile: partition plus a coefficient per basis function."""

    partition: Partition
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float).copy()
        if c.shape != (self.partition.n_basis,):
            raise ValueError(
                f"expected {self.partition.n_basis} coefficients, got {c.shape}"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    def __call__(self, r):
        return eval_spline(self, r)


def eval_spline(model: SplineModel, r):
    """Evaluate the spline at r, clamping r into [a, b]."""
    t = clamped_knots(model.partition)
    k = model.partition.degree
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    out = _core.bspline_value_many(t, model.coefficients, k, rs.ravel())
    if np.ndim(r) == 0:
        return float(out[0])
    return out.reshape(rs.shape)


def model_to_dict(model: SplineModel) -> dict:
    """Canonical JSON-ready form: {breakpoints, degree, coefficients}."""
    return {
        "breakpoints": model.partition.breakpoints.tolist(),
        "degree": model.partition.degree,
        "coefficients": model.coefficients.tolist(),
    }


def model_from_dict(data: dict) -> SplineModel:
    part = Partition(np.asarray(data["breakpoints"], dtype=float), int(data["degree"]))
    return SplineModel(part, np.asarray(data["coefficients"], dtype=float))


class SplineProfile:
    """Radial profile backed by a learned spline, with its exact potential.

    The potential integrates s * phi(s) with a per-interval 3-point Gauss
    rule (exact for cubic splines); below a and above b the clamped
    constant profile extends the potential quadratically, keeping it C^1.
    """

    def __init__(self, model: SplineModel):
        self.model = model
        part = model.partition
        self._knots = clamped_knots(part)
        self._coefs = model.coefficients
        self._breaks = part.breakpoints
        k = part.degree
        # cumulative integral of s*phi(s) at the breakpoints
        lo = self._breaks[:-1]
        hi = self._breaks[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        cum = np.zeros(self._breaks.size)
        for q in range(3):
            nodes = mid + half * _core.GAUSS_X[q]
            vals = _core.bspline_value_many(self._knots, self._coefs, k, nodes)
            cum[1:] += _core.GAUSS_W[q] * nodes * vals * half
        np.cumsum(cum, out=cum)
        self._pot_cum = cum
        phi_a = eval_spline(model, part.a)
        phi_b = eval_spline(model, part.b)
        self._params = np.array(
            [float(k), part.a, part.b, phi_a, phi_b], dtype=float
        )

    def phi(self, r):
        return eval_spline(self.model, r)

    def potential(self, r):
        rs = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
        out = np.empty(rs.size)
        for i, ri in enumerate(rs):
            out[i] = _core.potential_scalar(
                2, self._params, self._knots, self._coefs, self._breaks,
                self._pot_cum, ri,
            )
        if np.ndim(r) == 0:
            return float(out[0])
        return out.reshape(np.shape(r))

    def dispatch(self):
        return 2, self._params, self._knots, self._coefs, self._breaks, self._pot_cum
