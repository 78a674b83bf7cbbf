"""Numba-compiled numerical core.

B-spline evaluation uses the Cox-de Boor recursion.  The particle energy,
its gradient, and the implicit-Euler inner optimization are written as
plain pair loops with fixed reduction order, so repeated runs are
bit-stable.

Radial profiles are passed as a flat dispatch tuple
``(kind, params, knots, coefs, breaks, pot_cum)`` so a single compiled
simulator serves closed-form and learned-spline interaction laws:

* kind 0: cutoff power law, params = [chi * k_d, p, r_c] with p the
  profile exponent (2 for d <= 2, d otherwise)
* kind 1: epsilon-regularized 2-d law, params = [chi, eps]
* kind 2: clamped B-spline, params = [degree, a, b, phi(a), phi(b)]
  with knot/coefficient arrays, breakpoints, and the cumulative
  potential integral at the breakpoints.

The diffusion exponent ``m`` is 1 (log entropy) or 2 (quadratic); the
core additionally accepts m = 0 meaning "no diffusion term", used by
tests to isolate the interaction part.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

# 3-point Gauss-Legendre on [-1, 1]: exact for polynomials of degree <= 5,
# enough for r * (cubic spline).
GAUSS_X = np.array([-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0)])
GAUSS_W = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])


# --- B-spline evaluation (Cox-de Boor) --------------------------------------


@njit(cache=True, inline="always")
def _find_span(t, k, n, x):
    """Knot span i with t[i] <= x < t[i+1], clamped to [k, n-1]."""
    if x >= t[n]:
        return n - 1
    if x <= t[k]:
        return k
    lo = k
    hi = n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if x < t[mid]:
            hi = mid
        else:
            lo = mid
    return lo


@njit(cache=True)
def _basis_funs(t, k, span, x, out):
    """Cox-de Boor recursion: the k+1 nonzero basis values at x into out."""
    left = np.empty(k + 1)
    right = np.empty(k + 1)
    out[0] = 1.0
    for j in range(1, k + 1):
        left[j] = x - t[span + 1 - j]
        right[j] = t[span + j] - x
        saved = 0.0
        for r in range(j):
            temp = out[r] / (right[r + 1] + left[j - r])
            out[r] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        out[j] = saved


@njit(cache=True)
def bspline_value(t, c, k, x):
    """Evaluate a clamped B-spline at x, clamping x to the knot domain."""
    n = c.shape[0]
    if x < t[k]:
        x = t[k]
    elif x > t[n]:
        x = t[n]
    span = _find_span(t, k, n, x)
    vals = np.empty(k + 1)
    _basis_funs(t, k, span, x, vals)
    s = 0.0
    for j in range(k + 1):
        s += c[span - k + j] * vals[j]
    return s


@njit(cache=True)
def bspline_value_many(t, c, k, xs):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = bspline_value(t, c, k, xs[i])
    return out


@njit(cache=True)
def design_matrix(t, k, n, xs):
    """Dense (len(xs), n) matrix of clamped basis values."""
    B = np.zeros((xs.shape[0], n))
    vals = np.empty(k + 1)
    for i in range(xs.shape[0]):
        x = xs[i]
        if x < t[k]:
            x = t[k]
        elif x > t[n]:
            x = t[n]
        span = _find_span(t, k, n, x)
        _basis_funs(t, k, span, x, vals)
        for j in range(k + 1):
            B[i, span - k + j] = vals[j]
    return B


# --- radial profile dispatch -------------------------------------------------


@njit(cache=True, inline="always")
def phi_scalar(kind, params, knots, coefs, r):
    if kind == 0:
        rc = params[2]
        rr = r if r > rc else rc
        return params[0] / rr ** params[1]
    elif kind == 1:
        eps = params[1]
        return params[0] / (TWO_PI * (r * r + eps * eps))
    else:
        return bspline_value(knots, coefs, int(params[0]), r)


@njit(cache=True)
def potential_scalar(kind, params, knots, coefs, breaks, pot_cum, r):
    """Radial potential U(r) with U'(r) = phi(r) * r for the dispatched profile.

    For the spline profile the potential inside [a, b] is the exact
    (Gauss-quadrature) integral of s * phi(s); outside, phi is clamped
    constant so U extends by the matching quadratic.
    """
    if kind == 0:
        coef = params[0]
        power = params[1]
        rc = params[2]
        rr = r if r > rc else rc
        if power < 2.5:
            u = coef * np.log(rr)
        else:
            u = -coef * rr ** (2.0 - power) / (power - 2.0)
        if r < rc:
            u += 0.5 * (coef / rc**power) * (r * r - rc * rc)
        return u
    elif kind == 1:
        eps = params[1]
        return params[0] / (2.0 * TWO_PI) * np.log(r * r + eps * eps)
    else:
        k = int(params[0])
        a = params[1]
        b = params[2]
        if r <= a:
            return 0.5 * params[3] * (r * r - a * a)
        if r >= b:
            return pot_cum[pot_cum.shape[0] - 1] + 0.5 * params[4] * (r * r - b * b)
        j = _find_span(breaks, 0, breaks.shape[0] - 1, r)
        lo = breaks[j]
        half = 0.5 * (r - lo)
        mid = 0.5 * (r + lo)
        s = 0.0
        for q in range(3):
            node = mid + half * GAUSS_X[q]
            s += GAUSS_W[q] * node * bspline_value(knots, coefs, k, node)
        return pot_cum[j] + half * s


# --- particle energy and gradient --------------------------------------------


@njit(cache=True)
def energy_value(x, w, h, m, kind, params, knots, coefs, breaks, pot_cum):
    """Discrete regularized free energy of one configuration.

    E = w^2 sum_{i<j} U(r_ij) + w sum_i F_m(w sum_j K_h(r_ij)),
    with the mollifier sum including the self term K_h(0).
    """
    N, d = x.shape
    kh0 = (TWO_PI * h * h) ** (-0.5 * d)
    inv2h2 = 1.0 / (2.0 * h * h)
    S = np.full(N, kh0)
    e_int = 0.0
    for i in range(N):
        for j in range(i + 1, N):
            r2 = 0.0
            for q in range(d):
                dq = x[i, q] - x[j, q]
                r2 += dq * dq
            r = np.sqrt(r2)
            e_int += potential_scalar(kind, params, knots, coefs, breaks, pot_cum, r)
            kh = kh0 * np.exp(-r2 * inv2h2)
            S[i] += kh
            S[j] += kh
    e = w * w * e_int
    if m == 1:
        for i in range(N):
            e += w * np.log(w * S[i])
    elif m == 2:
        for i in range(N):
            e += w * (w * S[i])
    return e


@njit(cache=True)
def energy_gradient(x, w, h, m, kind, params, knots, coefs, breaks, pot_cum):
    """Gradient of energy_value with respect to every particle position.

    Per pair (i, j) the contribution to grad_i is
    w^2 [phi(r_ij) - (F'(s_i) + F'(s_j)) K_h(r_ij) / h^2] (x_i - x_j),
    and the opposite to grad_j, so total momentum is conserved exactly.
    """
    N, d = x.shape
    kh0 = (TWO_PI * h * h) ** (-0.5 * d)
    inv2h2 = 1.0 / (2.0 * h * h)
    invh2 = 1.0 / (h * h)
    S = np.full(N, kh0)
    K = np.empty((N, N))
    for i in range(N):
        K[i, i] = kh0
        for j in range(i + 1, N):
            r2 = 0.0
            for q in range(d):
                dq = x[i, q] - x[j, q]
                r2 += dq * dq
            kh = kh0 * np.exp(-r2 * inv2h2)
            K[i, j] = kh
            K[j, i] = kh
            S[i] += kh
            S[j] += kh
    fp = np.zeros(N)
    if m == 1:
        for i in range(N):
            fp[i] = 1.0 / (w * S[i])
    elif m == 2:
        for i in range(N):
            fp[i] = 1.0
    w2 = w * w
    grad = np.zeros((N, d))
    for i in range(N):
        for j in range(i + 1, N):
            r2 = 0.0
            for q in range(d):
                dq = x[i, q] - x[j, q]
                r2 += dq * dq
            r = np.sqrt(r2)
            p = phi_scalar(kind, params, knots, coefs, r)
            coef = w2 * (p - (fp[i] + fp[j]) * K[i, j] * invh2)
            for q in range(d):
                dq = x[i, q] - x[j, q]
                grad[i, q] += coef * dq
                grad[j, q] -= coef * dq
    return grad


@njit(cache=True)
def _prox_objective(y, x0, w, tau, h, m, kind, params, knots, coefs, breaks, pot_cum):
    e = energy_value(y, w, h, m, kind, params, knots, coefs, breaks, pot_cum)
    p = 0.0
    for i in range(y.shape[0]):
        for q in range(y.shape[1]):
            dq = y[i, q] - x0[i, q]
            p += dq * dq
    return e + 0.5 * w / tau * p


@njit(cache=True)
def implicit_step_core(
    x0, w, h, m, tau, tol, maxit, kind, params, knots, coefs, breaks, pot_cum
):
    """One implicit Euler step: minimize J(y) = (w/2 tau)|y - x0|^2 + E(y).

    Barzilai-Borwein gradient descent from y = x0 with nonmonotone Armijo
    backtracking (halving; the reference value is the largest J over the
    last few accepted iterates, which never exceeds J(x0), so the
    returned state still satisfies J(y) <= J(x0)).  The first trial step
    is tau / w, the explicit Euler scale.  Stops when max|grad J| <= tol.
    Returns (y, iterations, final gradient max-norm, converged flag).
    """
    N, d = x0.shape
    y = x0.copy()
    Jy = _prox_objective(y, x0, w, tau, h, m, kind, params, knots, coefs, breaks, pot_cum)
    n_mem = 8
    J_mem = np.full(n_mem, Jy)
    s0 = tau / w
    gmax = np.inf
    y_prev = np.empty_like(y)
    g_prev = np.empty_like(y)
    have_prev = False
    for it in range(maxit):
        g = energy_gradient(y, w, h, m, kind, params, knots, coefs, breaks, pot_cum)
        gmax = 0.0
        g2 = 0.0
        for i in range(N):
            for q in range(d):
                g[i, q] += (w / tau) * (y[i, q] - x0[i, q])
                a = abs(g[i, q])
                if a > gmax:
                    gmax = a
                g2 += g[i, q] * g[i, q]
        if gmax <= tol:
            return y, it, gmax, 1
        s = s0
        if have_prev:
            dy_dg = 0.0
            dy_dy = 0.0
            for i in range(N):
                for q in range(d):
                    dy = y[i, q] - y_prev[i, q]
                    dg = g[i, q] - g_prev[i, q]
                    dy_dg += dy * dg
                    dy_dy += dy * dy
            if dy_dg > 1.0e-300 and np.isfinite(dy_dg):
                s = dy_dy / dy_dg
                if not (s > 0.0 and np.isfinite(s)):
                    s = s0
        y_prev[:] = y
        g_prev[:] = g
        J_ref = J_mem[0]
        for q in range(1, n_mem):
            if J_mem[q] > J_ref:
                J_ref = J_mem[q]
        accepted = False
        for _ in range(70):
            trial = y - s * g
            Jt = _prox_objective(
                trial, x0, w, tau, h, m, kind, params, knots, coefs, breaks, pot_cum
            )
            if np.isfinite(Jt) and Jt <= J_ref - 1.0e-4 * s * g2:
                y = trial
                Jy = Jt
                J_mem[it % n_mem] = Jt
                accepted = True
                have_prev = True
                break
            s *= 0.5
        if not accepted:
            # at the numerical descent floor; report current residual
            return y, it + 1, gmax, 0
    g = energy_gradient(y, w, h, m, kind, params, knots, coefs, breaks, pot_cum)
    gmax = 0.0
    for i in range(N):
        for q in range(d):
            gq = g[i, q] + (w / tau) * (y[i, q] - x0[i, q])
            a = abs(gq)
            if a > gmax:
                gmax = a
    if gmax <= tol:
        return y, maxit, gmax, 1
    return y, maxit, gmax, 0


@njit(cache=True)
def simulate_det_core(
    x0,
    w,
    h,
    m,
    tau,
    tol,
    maxit,
    n_obs,
    steps_per_obs,
    kind,
    params,
    knots,
    coefs,
    breaks,
    pot_cum,
):
    """Implicit-Euler trajectory, recording every steps_per_obs-th state.

    Returns (frames, unconverged step count, worst residual, failed_at);
    failed_at is the first observation index with a non-finite state, or
    -1 on success.
    """
    N, d = x0.shape
    frames = np.empty((n_obs + 1, N, d))
    frames[0] = x0
    x = x0.copy()
    n_unconv = 0
    worst = 0.0
    for ob in range(n_obs):
        for _ in range(steps_per_obs):
            x, it, gn, conv = implicit_step_core(
                x, w, h, m, tau, tol, maxit, kind, params, knots, coefs, breaks, pot_cum
            )
            if conv == 0:
                n_unconv += 1
                if gn > worst:
                    worst = gn
        frames[ob + 1] = x
        for i in range(N):
            for q in range(d):
                if not np.isfinite(x[i, q]):
                    return frames, n_unconv, worst, ob + 1
    return frames, n_unconv, worst, -1
