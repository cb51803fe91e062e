"""The three control laws and their scenario running costs.

IADP is model-free: it reads only the constant surrogate g_bar, the critic
basis/weights, and the delayed input u0. ZSADP and TADP are the model-based
baselines; they capture the true plant's g and k at construction and keep
using them even if the simulated plant is swapped mid-run (the robustness
stress of the benchmark), unless explicitly re-bound.
"""

from dataclasses import dataclass, field

import numpy as np

from .critic import BasisSet, CostConfig, grad_phi, penalty_W
from .kernels import saturated_control
from .tde import IncrementalModelConfig


@dataclass
class ControlOutput:
    u: np.ndarray
    du: np.ndarray | None = None
    aux: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class IadpController:
    cfg: IncrementalModelConfig
    cost: CostConfig
    basis: BasisSet


def iadp_control(ctrl: IadpController, w, x, u0) -> ControlOutput:
    """u = -beta tanh(g_bar^T grad_phi^T w / (2 beta)); du = u - u0."""
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    gphi = grad_phi(ctrl.basis, x)
    u = saturated_control(ctrl.cfg.g_bar, gphi, np.asarray(w, dtype=float),
                          ctrl.cost.beta)
    return ControlOutput(u=u, du=u - u0)


def iadp_cost(x, du, u0, cfg: CostConfig) -> float:
    """Running cost of the incremental law; delegates to the shared form."""
    from .critic import running_cost
    return running_cost(x, du, u0, cfg)


@dataclass
class ZsadpController:
    """Zero-sum-game baseline: needs the true g and k, plays a worst-case
    disturbance policy inside its cost."""

    g: np.ndarray
    k: np.ndarray
    gamma: float
    cost: CostConfig
    basis: BasisSet

    def __post_init__(self):
        self.g = np.atleast_2d(np.asarray(self.g, dtype=float)).reshape(-1, 1) \
            if np.asarray(self.g).ndim == 1 else np.asarray(self.g, dtype=float)
        self.k = np.atleast_2d(np.asarray(self.k, dtype=float)).reshape(-1, 1) \
            if np.asarray(self.k).ndim == 1 else np.asarray(self.k, dtype=float)


def zsadp_control(ctrl: ZsadpController, w, x) -> ControlOutput:
    """u = -beta tanh(g^T grad_phi^T w / (2 beta)); aux is the worst-case
    disturbance estimate d_hat = k^T grad_phi^T w / (2 gamma^2)."""
    w = np.asarray(w, dtype=float)
    gphi = grad_phi(ctrl.basis, x)
    u = saturated_control(ctrl.g, gphi, w, ctrl.cost.beta)
    d_hat = ctrl.k.T @ (gphi.T @ w) / (2.0 * ctrl.gamma ** 2)
    return ControlOutput(u=u, aux=d_hat)


def zsadp_cost(x, u, d_hat, cfg: CostConfig, gamma: float) -> float:
    """x^T Q x + W(u) - gamma ||d_hat||^2."""
    x = np.asarray(x, dtype=float)
    d_hat = np.atleast_1d(np.asarray(d_hat, dtype=float))
    return float(x @ cfg.Q @ x) + penalty_W(u, cfg.beta) - gamma * float(d_hat @ d_hat)


@dataclass
class TadpController:
    """Transformed-optimal-control baseline with disturbance-bound cost terms.

    h = (I - g g^+) k is the out-of-span disturbance direction; the bound
    coefficients encode |d| <= (sqrt(2)/2)||x|| and l_M = 0.4 sqrt(2) ||x||.
    """

    g: np.ndarray
    k: np.ndarray
    rho: float
    cost: CostConfig
    basis: BasisSet
    d_M_coeff: float = np.sqrt(2.0) / 2.0
    l_M_coeff: float = 0.4 * np.sqrt(2.0)
    h: np.ndarray = None

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float).reshape(-1, 1) \
            if np.asarray(self.g).ndim == 1 else np.asarray(self.g, dtype=float)
        self.k = np.asarray(self.k, dtype=float).reshape(-1, 1) \
            if np.asarray(self.k).ndim == 1 else np.asarray(self.k, dtype=float)
        self.rebind(self.g, self.k)

    def rebind(self, g, k) -> None:
        """Recompute h from (possibly new) plant matrices."""
        self.g = np.asarray(g, dtype=float).reshape(self.g.shape)
        self.k = np.asarray(k, dtype=float).reshape(self.k.shape)
        n = self.g.shape[0]
        g_pinv = np.linalg.pinv(self.g)
        self.h = (np.eye(n) - self.g @ g_pinv) @ self.k


def tadp_control(ctrl: TadpController, w, x) -> ControlOutput:
    """u = -beta tanh(g^T grad_phi^T w / (2 beta)); aux is the pseudo control
    v_hat = -h^T grad_phi^T w / (2 rho)."""
    w = np.asarray(w, dtype=float)
    gphi = grad_phi(ctrl.basis, x)
    u = saturated_control(ctrl.g, gphi, w, ctrl.cost.beta)
    v_hat = -ctrl.h.T @ (gphi.T @ w) / (2.0 * ctrl.rho)
    return ControlOutput(u=u, aux=v_hat)


def tadp_cost(x, u, v_hat, cfg: CostConfig, rho: float,
              d_M_coeff: float = np.sqrt(2.0) / 2.0,
              l_M_coeff: float = 0.4 * np.sqrt(2.0)) -> float:
    """x^T Q x + W(u) + rho ||v_hat||^2 + (l_M^2 + d_M^2) ||x||^2 terms."""
    x = np.asarray(x, dtype=float)
    v_hat = np.atleast_1d(np.asarray(v_hat, dtype=float))
    xx = float(x @ x)
    return float(x @ cfg.Q @ x) + penalty_W(u, cfg.beta) + rho * float(v_hat @ v_hat) \
        + (l_M_coeff ** 2) * xx + (d_M_coeff ** 2) * xx
