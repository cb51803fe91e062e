"""Timing comparison of the jitted kernels against their numpy fallbacks.

Run as ``python benchmarks/bench_kernels.py``. When numba is unavailable (or
IADP_NO_NUMBA=1 is set) both columns time the same numpy implementation.
"""

import time

import numpy as np

from iadp import kernels
from iadp.critic import DEFAULT_EXPONENTS


def timeit(fn, args, repeat=5, inner=20000):
    fn(*args)  # warm-up / trigger compilation
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def main():
    rng = np.random.default_rng(0)
    x = rng.uniform(-2, 2, 2)
    w = rng.uniform(-3, 3, 6)
    gphi = kernels.monomial_grad_np(DEFAULT_EXPONENTS, x)
    gmat = np.array([[0.0], [0.1]])
    u = np.array([1.3])
    Y = rng.uniform(-50, 50, 6)
    Yb = rng.uniform(-50, 50, (8, 6))
    thetab = rng.uniform(0, 5, 8)
    gamma = 1e-4 * np.eye(6)
    p = np.array([1.0, -4.9, -0.2, 0.25, 1.0, -0.2])
    dist = np.array([-0.3906, 1.0051, 1.0, 0.2, 5.0, 20.0, 60.0])

    cases = [
        ("monomial_eval", kernels.monomial_eval, kernels.monomial_eval_np,
         (DEFAULT_EXPONENTS, x)),
        ("monomial_grad", kernels.monomial_grad, kernels.monomial_grad_np,
         (DEFAULT_EXPONENTS, x)),
        ("saturated_control", kernels.saturated_control,
         kernels.saturated_control_np, (gmat, gphi, w, 2.0)),
        ("penalty_sat", kernels.penalty_sat, kernels.penalty_sat_np, (u, 2.0)),
        ("weight_derivative", kernels.weight_derivative_kernel,
         kernels.weight_derivative_np, (w, Y, 1.5, Yb, thetab, gamma, 5.0, 3.0)),
        ("pendulum_rk4", kernels.pendulum_rk4, kernels.pendulum_rk4_np,
         (x, 1.3, p, dist, 10.0, 1e-3)),
    ]

    backend = "numba" if kernels.USE_NUMBA else "numpy (fallback active)"
    print(f"active backend: {backend}")
    print(f"{'kernel':<20} {'active [us]':>12} {'numpy [us]':>12} {'speedup':>8}")
    for name, active, ref, args in cases:
        ta = timeit(active, args) * 1e6
        tn = timeit(ref, args) * 1e6
        print(f"{name:<20} {ta:>12.3f} {tn:>12.3f} {tn / ta:>8.2f}x")


if __name__ == "__main__":
    main()
