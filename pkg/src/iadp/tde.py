"""Time-delay estimation layer: delayed sample history and measured increments.

The controller never sees the plant; it sees (x, xdot, u) samples. The delay
line holds them and produces the incremental quantities (dx_dot, du, u0,
x0dot) that stand in for the unknown dynamics. The true lumped-term gap xi is
reconstructed here for diagnostics only.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .plant import ConfigurationError


class WarmUpError(LookupError):
    """History is too short for the requested quantity; caller holds u at 0."""


@dataclass
class DelaySample:
    t: float
    x: np.ndarray
    xdot: np.ndarray
    u: np.ndarray


@dataclass
class IncrementRecord:
    dx_dot: np.ndarray
    du: np.ndarray
    u0: np.ndarray
    x0dot: np.ndarray


class IncrementalModelConfig:
    """Constant input-map surrogate g_bar and its left pseudo-inverse."""

    def __init__(self, g_bar):
        self.g_bar = np.atleast_2d(np.asarray(g_bar, dtype=float))
        if self.g_bar.shape[0] < self.g_bar.shape[1]:
            self.g_bar = self.g_bar.T
        n, m = self.g_bar.shape
        if np.linalg.matrix_rank(self.g_bar) < m:
            raise ConfigurationError("g_bar must have full column rank")
        self.g_bar_pinv = np.linalg.pinv(self.g_bar)


class DelayLine:
    """Ring buffer of equally spaced samples with an exact L = k*dt lookup."""

    def __init__(self, dt: float, delay: float, capacity: int | None = None):
        if dt <= 0:
            raise ConfigurationError("dt must be > 0")
        ratio = delay / dt
        self.delay_steps = int(round(ratio))
        if abs(ratio - self.delay_steps) > 1e-9 or self.delay_steps < 1:
            raise ConfigurationError("delay must be a positive integer multiple of dt")
        self.dt = dt
        self.delay = delay
        self.capacity = capacity if capacity is not None else self.delay_steps + 2
        if self.capacity < self.delay_steps + 1:
            raise ConfigurationError("capacity too small for the configured delay")
        self.samples: deque[DelaySample] = deque(maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self.samples)

    def push(self, s: DelaySample) -> None:
        if self.samples:
            gap = s.t - self.samples[-1].t
            if abs(gap - self.dt) > 1e-9:
                raise ValueError(f"out-of-order or gapped timestamp: step of {gap}, expected {self.dt}")
        self.samples.append(s)

    def delayed(self) -> DelaySample:
        """The sample at t - L relative to the most recent push."""
        if len(self.samples) < self.delay_steps + 1:
            raise WarmUpError("delay line not yet full")
        return self.samples[-1 - self.delay_steps]


def push_sample(line: DelayLine, s: DelaySample) -> None:
    line.push(s)


def estimate_xdot(line: DelayLine, method: str = "backward_difference") -> np.ndarray:
    """State-derivative estimate at the newest sample.

    "backward_difference" returns (x(t) - x(t-dt))/dt; "ground_truth" passes
    through the xdot the simulator stored on the newest sample.
    """
    if not line.samples:
        raise WarmUpError("empty delay line")
    if method == "ground_truth":
        return line.samples[-1].xdot
    if method == "backward_difference":
        if len(line.samples) < 2:
            raise WarmUpError("backward difference needs two samples")
        a, b = line.samples[-2], line.samples[-1]
        return (b.x - a.x) / line.dt
    raise ConfigurationError(f"unknown xdot method {method!r}")


def compute_increments(line: DelayLine, now: DelaySample,
                       cfg: IncrementalModelConfig) -> IncrementRecord:
    """Increments between the newest sample and the one L seconds earlier."""
    past = line.delayed()
    if abs((now.t - past.t) - line.delay) > 1e-9:
        raise WarmUpError("no sample at exactly t - L")
    return IncrementRecord(
        dx_dot=now.xdot - past.xdot,
        du=now.u - past.u,
        u0=past.u.copy(),
        x0dot=past.xdot.copy(),
    )


def true_tde_error(rec: IncrementRecord, cfg: IncrementalModelConfig) -> np.ndarray:
    """Diagnostic TDE error xi = g_bar^+ dx_dot - du (zero iff the incremental
    model reproduces the measured increment exactly)."""
    return cfg.g_bar_pinv @ rec.dx_dot - rec.du


def fit_tde_bound(xi_norms, du_norms) -> tuple[float, float]:
    """Least-squares fit ||xi|| ~ c*||du|| + delta1 over a logged episode.

    Degenerate logs (all du zero) collapse to an intercept-only fit.
    """
    xi_norms = np.asarray(xi_norms, dtype=float)
    du_norms = np.asarray(du_norms, dtype=float)
    if xi_norms.shape != du_norms.shape or xi_norms.ndim != 1:
        raise ConfigurationError("xi and du norm logs must be equal-length vectors")
    if len(xi_norms) < 100:
        raise ConfigurationError("need at least 100 logged pairs")
    if np.ptp(du_norms) < 1e-15:
        return 0.0, float(np.mean(xi_norms))
    A = np.column_stack([du_norms, np.ones_like(du_norms)])
    (c_fit, delta1_fit), *_ = np.linalg.lstsq(A, xi_norms, rcond=None)
    return float(c_fit), float(delta1_fit)
