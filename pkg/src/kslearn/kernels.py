"""Radial interaction kernels, their regularizations, and the Gaussian mollifier.

Conventions used throughout the package:

* the pairwise drift on particle i is ``(1/N) sum_j phi(r_ij) (x_j - x_i)``,
  so an attractive interaction has ``phi > 0`` in every dimension;
* the radial potential ``U`` satisfies ``U'(r) = phi(r) * r``, equivalently
  ``grad U(|x|) = phi(|x|) x``.

Two regularizations of the singular ``phi(r) = chi * k_d / r^d`` are
provided: a hard cutoff that freezes the profile below a radius ``r_c``
(used by the deterministic scheme) and a smooth ``r^2 + eps^2`` shift of
the 2-d profile (used by the stochastic scheme).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class NumericError(RuntimeError):
    """A computation produced a non-finite or degenerate value."""


@dataclass(frozen=True)
class Cutoff:
    """Freeze the profile at its value at radius ``r_c`` for r <= r_c."""

    r_c: float

    def __post_init__(self):
        if not self.r_c > 0.0:
            raise ValueError(f"cutoff radius must be positive, got {self.r_c}")


@dataclass(frozen=True)
class Epsilon:
    """Shift the squared radius by ``eps**2`` (smooth 2-d regularization)."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.eps}")


@dataclass(frozen=True)
class KernelSpec:
    """Interaction kernel parameters shared by simulators and the learner.

    d     spatial dimension (1..4 for the built-in profiles)
    chi   chemotactic sensitivity, scales the whole interaction
    reg   Cutoff(r_c) or Epsilon(eps)
    m     diffusion exponent (1 linear, 2 porous-medium quadratic)
    h     Gaussian mollifier bandwidth
    """

    d: int
    chi: float
    reg: Cutoff | Epsilon
    m: int = 1
    h: float = 0.01

    def __post_init__(self):
        if self.d not in (1, 2, 3, 4):
            raise ValueError(f"built-in profiles support d in 1..4, got {self.d}")
        if not self.chi > 0.0:
            raise ValueError(f"chi must be positive, got {self.chi}")
        if self.m not in (1, 2):
            raise ValueError(f"diffusion exponent must be 1 or 2, got {self.m}")
        if not self.h > 0.0:
            raise ValueError(f"mollifier bandwidth must be positive, got {self.h}")

    @property
    def r_c(self) -> float:
        if not isinstance(self.reg, Cutoff):
            raise TypeError("kernel is not cutoff-regularized")
        return self.reg.r_c

    @property
    def eps(self) -> float:
        if not isinstance(self.reg, Epsilon):
            raise TypeError("kernel is not epsilon-regularized")
        return self.reg.eps


def surface_area(d: int) -> float:
    """Surface area of the unit sphere in R^d, ``2 pi^(d/2) / Gamma(d/2)``."""
    if d < 3:
        raise ValueError(f"surface_area is used for d >= 3 only, got {d}")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def radial_coefficient(d: int) -> float:
    """Dimension constant k_d in phi(r) = chi * k_d / r^profile_power(d)."""
    if d == 1:
        return 2.0
    if d == 2:
        return 1.0 / TWO_PI
    return 1.0 / surface_area(d)


def profile_power(d: int) -> int:
    """Exponent of r in the attractive profile.

    The potential is logarithmic for d = 1 (modified model) and d = 2,
    giving phi(r) = k_d / r^2 there; for d >= 3 the Newtonian potential
    gives phi(r) = k_d / r^d.
    """
    return max(d, 2)


def profile_true(spec: KernelSpec, r):
    """Unregularized attractive profile chi * k_d / r^p.  Singular at r = 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("profile_true requires r > 0")
    out = spec.chi * radial_coefficient(spec.d) / r ** profile_power(spec.d)
    return out if out.ndim else float(out)


def profile_cutoff(spec: KernelSpec, r):
    """Cutoff profile: phi(r) for r > r_c, frozen at phi(r_c) below."""
    r_c = spec.r_c
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("radius must be nonnegative")
    out = profile_true(spec, np.maximum(r, r_c))
    return out if np.ndim(out) else float(out)


def profile_epsilon(chi: float, eps: float, r):
    """Smooth 2-d profile chi / (2 pi (r^2 + eps^2)); positive and bounded."""
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    r = np.asarray(r, dtype=float)
    out = chi / (TWO_PI * (r * r + eps * eps))
    return out if out.ndim else float(out)


def potential_true(spec: KernelSpec, r):
    """Radial potential with U'(r) = profile_true(r) * r (additive constant free)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("potential_true requires r > 0")
    c = spec.chi * radial_coefficient(spec.d)
    if spec.d in (1, 2):
        out = c * np.log(r)
    else:
        out = -c * r ** (2 - spec.d) / (spec.d - 2)
    return out if out.ndim else float(out)


def potential_cutoff(spec: KernelSpec, r):
    """C^1 potential of the cutoff profile.

    Above r_c this is the true potential; below, the unique quadratic whose
    gradient matches the frozen force phi(r_c) * r and which is continuous
    at r_c.
    """
    r_c = spec.r_c
    r = np.asarray(r, dtype=float)
    out = np.asarray(potential_true(spec, np.maximum(r, r_c)), dtype=float)
    inside = r < r_c
    if np.any(inside):
        plateau = profile_true(spec, r_c)
        out = np.where(inside, out + 0.5 * plateau * (r * r - r_c * r_c), out)
    return out if out.ndim else float(out)


def potential_epsilon(chi: float, eps: float, r):
    """Potential of the epsilon profile: chi/(4 pi) * log(r^2 + eps^2)."""
    r = np.asarray(r, dtype=float)
    out = chi / (2.0 * TWO_PI) * np.log(r * r + eps * eps)
    return out if out.ndim else float(out)


def mollifier(h: float, d: int, x):
    """Gaussian mollifier K_h(x) = (2 pi h^2)^(-d/2) exp(-|x|^2 / 2h^2)."""
    if not h > 0.0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    out = (TWO_PI * h * h) ** (-d / 2.0) * np.exp(-r2 / (2.0 * h * h))
    return out if np.ndim(out) else float(out)


def mollifier_grad(h: float, d: int, x):
    """Gradient of the mollifier, -x / h^2 * K_h(x)."""
    x = np.asarray(x, dtype=float)
    k = mollifier(h, d, x)
    return -x / (h * h) * np.asarray(k)[..., None]


def diffusion_f(m: int, s):
    """Diffusion free-energy density F_m: log(s) for m=1, s for m=2."""
    s = np.asarray(s, dtype=float)
    if m == 1:
        out = np.log(s)
    elif m == 2:
        out = s
    else:
        raise ValueError(f"diffusion exponent must be 1 or 2, got {m}")
    return out if out.ndim else float(out)


def diffusion_f_deriv(m: int, s):
    """Derivative F_m'(s)."""
    s = np.asarray(s, dtype=float)
    if m == 1:
        out = 1.0 / s
    elif m == 2:
        out = np.ones_like(s)
    else:
        raise ValueError(f"diffusion exponent must be 1 or 2, got {m}")
    return out if out.ndim else float(out)


# --- radial profile objects -------------------------------------------------
#
# The simulators accept any object with vectorized phi(r) / potential(r) and
# a dispatch() method that flattens it for the numba core:
#   (kind, params, knots, coefs, breaks, pot_cum)
# kind 0 = cutoff power law, 1 = epsilon profile, 2 = clamped B-spline.

_EMPTY = np.empty(0, dtype=float)


class CutoffProfile:
    """Regularized truth profile of a cutoff kernel, with its C^1 potential."""

    def __init__(self, spec: KernelSpec):
        if not isinstance(spec.reg, Cutoff):
            raise TypeError("CutoffProfile needs a cutoff-regularized spec")
        self.spec = spec

    def phi(self, r):
        return profile_cutoff(self.spec, r)

    def potential(self, r):
        return potential_cutoff(self.spec, r)

    def dispatch(self):
        s = self.spec
        params = np.array(
            [s.chi * radial_coefficient(s.d), float(profile_power(s.d)), s.r_c],
            dtype=float,
        )
        return 0, params, _EMPTY, _EMPTY, _EMPTY, _EMPTY


class EpsilonProfile:
    """Smooth epsilon-regularized 2-d profile with its log potential."""

    def __init__(self, chi: float, eps: float):
        if not (chi > 0.0 and eps > 0.0):
            raise ValueError("chi and eps must be positive")
        self.chi = chi
        self.eps = eps

    def phi(self, r):
        return profile_epsilon(self.chi, self.eps, r)

    def potential(self, r):
        return potential_epsilon(self.chi, self.eps, r)

    def dispatch(self):
        params = np.array([self.chi, self.eps], dtype=float)
        return 1, params, _EMPTY, _EMPTY, _EMPTY, _EMPTY


def truth_profile(spec: KernelSpec):
    """The regularized profile a dataset with this kernel was generated from."""
    if isinstance(spec.reg, Cutoff):
        return CutoffProfile(spec)
    return EpsilonProfile(spec.chi, spec.reg.eps)
