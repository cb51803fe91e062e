"""Hot numeric kernels with numba-jitted and pure-numpy variants.

Every kernel exists twice: a plain numpy implementation (suffix ``_np``)
and, when numba is importable, an ``@njit``-compiled version. The active
set is chosen once at import time; set the environment variable
``IADP_NO_NUMBA=1`` to force the numpy fallbacks (useful for debugging
and for the benchmark in ``benchmarks/bench_kernels.py``).

All kernels operate on float64 arrays and tiny dimensions (n=2, N=6 for
the default pendulum setup), so the win from numba is mostly the removal
of per-call numpy dispatch overhead inside the 10^5-step episode loop.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("IADP_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:
        USE_NUMBA = False

# argument clamp for atanh: |v/beta| is kept off the boundary
ATANH_MARGIN = 1e-9


def monomial_eval_np(exponents, x):
    """Evaluate monomial features prod_i x_i**e_i for each row of exponents."""
    N, n = exponents.shape
    out = np.ones(N)
    for k in range(N):
        for i in range(n):
            e = exponents[k, i]
            if e > 0:
                out[k] *= x[i] ** e
    return out


def monomial_grad_np(exponents, x):
    """Gradient rows of the monomial features; exact for integer exponents."""
    N, n = exponents.shape
    out = np.zeros((N, n))
    for k in range(N):
        for j in range(n):
            e = exponents[k, j]
            if e == 0:
                continue
            g = float(e)
            for i in range(n):
                ei = exponents[k, i]
                if i == j:
                    if ei > 1:
                        g *= x[i] ** (ei - 1)
                else:
                    if ei > 0:
                        g *= x[i] ** ei
            out[k, j] = g
    return out


def saturated_control_np(gmat, gphi, w, beta):
    """u = -beta * tanh(g^T (grad_phi^T w) / (2 beta)), clamped off +-beta."""
    z = gmat.T @ (gphi.T @ w) / (2.0 * beta)
    u = -beta * np.tanh(z)
    lim = beta - 1e-12
    return np.clip(u, -lim, lim)


def penalty_sat_np(v, beta):
    """Saturation penalty 2*b*v*atanh(v/b) + b^2*log(1 - v^2/b^2), summed."""
    total = 0.0
    for j in range(v.shape[0]):
        s = v[j] / beta
        if s > 1.0 - ATANH_MARGIN:
            s = 1.0 - ATANH_MARGIN
        elif s < -1.0 + ATANH_MARGIN:
            s = -1.0 + ATANH_MARGIN
        total += beta * beta * (2.0 * s * np.arctanh(s) + np.log1p(-s * s))
    return total


def weight_derivative_np(w, Y, theta, Yb, thetab, gamma, k_c, k_e):
    """Off-policy critic update: gradient of the current + replayed residuals.

    Replay residuals are recomputed against the live weights, so the
    returned vector is -Gamma * grad_w of
    0.5*k_c*(theta + w.Y)^2 + 0.5*k_e*sum_l (theta_l + w.Y_l)^2.
    """
    acc = k_c * (theta + w @ Y) * Y
    for l in range(Yb.shape[0]):
        acc = acc + k_e * (thetab[l] + w @ Yb[l]) * Yb[l]
    return -(gamma @ acc)


def pendulum_rhs_np(x, u0, p, dist, t):
    """RHS of the parametric pendulum family.

    p = [a, b, c, g2, k1, k2] encodes f = [a*x2, b*sin(x1) + c*x2],
    g = [0, g2], k = [k1, k2]. dist = [w1, w2, sq_on, A, period, t_on, t_off]
    encodes the scalar disturbance d = w1*x1*sin(w2*x2) + square(t).
    """
    d = dist[0] * x[0] * np.sin(dist[1] * x[1])
    if dist[2] != 0.0 and dist[5] <= t < dist[6]:
        phase = (t - dist[5]) % dist[4]
        d += dist[3] if phase < 0.5 * dist[4] else -dist[3]
    out = np.empty(2)
    out[0] = p[0] * x[1] + p[4] * d
    out[1] = p[1] * np.sin(x[0]) + p[2] * x[1] + p[3] * u0 + p[5] * d
    return out


def pendulum_rk4_np(x, u0, p, dist, t, dt):
    """Classical RK4 step of the parametric pendulum under zero-order hold."""
    k1 = pendulum_rhs_np(x, u0, p, dist, t)
    k2 = pendulum_rhs_np(x + 0.5 * dt * k1, u0, p, dist, t + 0.5 * dt)
    k3 = pendulum_rhs_np(x + 0.5 * dt * k2, u0, p, dist, t + 0.5 * dt)
    k4 = pendulum_rhs_np(x + dt * k3, u0, p, dist, t + dt)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


if USE_NUMBA:
    _opts = dict(cache=True, fastmath=False)
    monomial_eval = njit(**_opts)(monomial_eval_np)
    monomial_grad = njit(**_opts)(monomial_grad_np)
    saturated_control = njit(**_opts)(saturated_control_np)
    penalty_sat = njit(**_opts)(penalty_sat_np)
    weight_derivative_kernel = njit(**_opts)(weight_derivative_np)
    _pendulum_rhs = njit(**_opts)(pendulum_rhs_np)

    @njit(**_opts)
    def pendulum_rk4(x, u0, p, dist, t, dt):
        k1 = _pendulum_rhs(x, u0, p, dist, t)
        k2 = _pendulum_rhs(x + 0.5 * dt * k1, u0, p, dist, t + 0.5 * dt)
        k3 = _pendulum_rhs(x + 0.5 * dt * k2, u0, p, dist, t + 0.5 * dt)
        k4 = _pendulum_rhs(x + dt * k3, u0, p, dist, t + dt)
        return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
else:
    monomial_eval = monomial_eval_np
    monomial_grad = monomial_grad_np
    saturated_control = saturated_control_np
    penalty_sat = penalty_sat_np
    weight_derivative_kernel = weight_derivative_np
    pendulum_rk4 = pendulum_rk4_np
