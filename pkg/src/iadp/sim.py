"""Fixed-step closed-loop simulation engine.

Per step: measure (noise) -> estimate xdot -> controller -> increments ->
learner update -> buffer candidate -> integrate plant -> fire events ->
accumulate metrics. One episode is strictly sequential; separate episodes
share no mutable state.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .controllers import TadpController, ZsadpController
from .critic import BasisSet, CostConfig
from .learner import ExperienceBuffer, LearnerGains, try_insert
from .plant import (ConfigurationError, ControlAffinePlant, DisturbanceSignal,
                    EventSchedule, NoiseSpec, NoiseState, add_measurement_noise,
                    apply_event_schedule, disturbance_value, eval_dynamics)
from .tde import IncrementalModelConfig

DIVERGENCE_NORM = 1e6


@dataclass
class SimConfig:
    """Fully resolved episode configuration (benchmark defaults)."""

    scenario: str = "s1"
    controller: str = "iadp"
    dt: float = 1e-3
    t_end: float = 80.0
    seed: int = 0
    xdot_source: str = "backward_difference"
    x0: np.ndarray = field(default_factory=lambda: np.array([2.0, -2.0]))
    g_bar: np.ndarray = field(default_factory=lambda: np.array([[0.0], [0.1]]))
    Q: np.ndarray = field(default_factory=lambda: np.eye(2))
    beta: float = 2.0
    c_bar: float = 2.0
    Gamma: np.ndarray = field(default_factory=lambda: 1e-4 * np.eye(6))
    k_c: float = 5.0
    k_e: float = 3.0
    buffer_size: int = 8
    buffer_policy: str = "sequential_fill"
    buffer_every: int = 10
    buffer_until: float = 2.0
    rank_deadline: float = 5.0
    basis_exponents: np.ndarray = field(
        default_factory=lambda: BasisSet.default().exponents.copy())
    gamma: float = 1.0
    rho: float = 0.1
    baselines_track_swap: bool = False
    noise_absolute_power: bool = False
    learning_enabled: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be > 0")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-6:
            raise ConfigurationError("t_end must be a multiple of dt")
        if self.controller not in ("iadp", "zsadp", "tadp", "zero"):
            raise ConfigurationError(f"unknown controller {self.controller!r}")
        if self.xdot_source not in ("backward_difference", "ground_truth"):
            raise ConfigurationError(f"unknown xdot source {self.xdot_source!r}")


@dataclass
class TrajectoryLog:
    t: np.ndarray
    x_true: np.ndarray
    x_meas: np.ndarray
    u: np.ndarray
    du: np.ndarray
    w: np.ndarray
    theta_tilde: np.ndarray
    xi: np.ndarray
    d: np.ndarray
    E_u: np.ndarray
    E_x: np.ndarray
    rank: np.ndarray
    diverged: bool = False
    diverged_step: int = -1
    insufficient_excitation: bool = False
    fired_events: list = field(default_factory=list)
    buffer_sigma_min: float = 0.0
    wall_time: float = 0.0

    def rows(self) -> int:
        return self.t.shape[0]


@dataclass
class Metrics:
    E_u: np.ndarray
    E_x: np.ndarray


class World:
    """Mutable simulation environment the event schedule acts on."""

    def __init__(self, plant, disturbance, noise):
        self.plant = plant
        self.disturbance = disturbance
        self.noise = noise


def rk4_step(plant: ControlAffinePlant, x, u, d_fn, t: float, dt: float) -> np.ndarray:
    """Classical RK4 advance of xdot = f + g u + k d with u held constant.

    ``d_fn(x, t)`` is evaluated at the stage states and times.
    """
    def rhs(xs, ts):
        return eval_dynamics(plant, xs, u, d_fn(xs, ts), ts)

    k1 = rhs(x, t)
    k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(x + dt * k3, t + dt)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _plant_matrices(plant: ControlAffinePlant, x):
    g = plant.input_map(np.asarray(x, dtype=float)).reshape(plant.n, plant.m)
    k = plant.disturbance_map(np.asarray(x, dtype=float)).reshape(plant.n, plant.q)
    return g, k


def run_episode(cfg: SimConfig, world: World,
                schedule: EventSchedule | None = None) -> TrajectoryLog:
    """Run one closed-loop episode and return the complete per-step log."""
    t_start = time.perf_counter()
    schedule = schedule or EventSchedule([])
    rng = np.random.default_rng(cfg.seed)

    basis = BasisSet(cfg.basis_exponents)
    exps = basis.exponents
    N, n = basis.N, basis.n
    m = world.plant.m
    cost = CostConfig(cfg.Q, cfg.beta, cfg.c_bar)
    imc = IncrementalModelConfig(cfg.g_bar)
    gains = LearnerGains(cfg.Gamma, cfg.k_c, cfg.k_e)
    buf = ExperienceBuffer(cfg.buffer_size, N, cfg.buffer_policy)

    g_ctrl, k_ctrl = _plant_matrices(world.plant, cfg.x0)
    tadp = None
    if cfg.controller == "tadp":
        tadp = TadpController(g_ctrl, k_ctrl, cfg.rho, cost, basis)
    zsadp = None
    if cfg.controller == "zsadp":
        zsadp = ZsadpController(g_ctrl, k_ctrl, cfg.gamma, cost, basis)

    dt = cfg.dt
    steps = int(round(cfg.t_end / dt))
    S = steps + 1
    delay_steps = 1  # L = dt, one-sample delay
    H = delay_steps + 2

    log = TrajectoryLog(
        t=np.arange(S) * dt,
        x_true=np.zeros((S, n)), x_meas=np.zeros((S, n)),
        u=np.zeros((S, m)), du=np.zeros((S, m)), w=np.zeros((S, N)),
        theta_tilde=np.zeros(S), xi=np.zeros((S, m)), d=np.zeros(S),
        E_u=np.zeros(S), E_x=np.zeros(S), rank=np.zeros(S, dtype=np.int64),
    )

    hx = np.zeros((H, n))
    hxd = np.zeros((H, n))
    hu = np.zeros((H, m))
    x = np.asarray(cfg.x0, dtype=float).copy()
    w = np.zeros(N)
    noise_state = NoiseState(n)
    beta = cfg.beta
    c_bar2 = cfg.c_bar ** 2
    Q = cost.Q
    g_bar = imc.g_bar
    g_bar_pinv = imc.g_bar_pinv
    clamp = beta - 1e-12

    rank_val = 0
    sigma_min = 0.0
    rank_complete = False
    prev_u_sq = 0.0
    prev_x_sq = float(x @ x)
    xm_prev = x.copy()
    fused = world.plant.pendulum_params is not None and m == 1 and n == 2
    pparams = world.plant.pendulum_params
    dparams = world.disturbance.packed()

    # a diverging baseline overflows its quadratic cost terms before the
    # divergence flag trips; silence the transient overflow warnings
    _err = np.seterr(over="ignore", invalid="ignore")
    for i in range(S):
        t = i * dt

        # --- measurement
        noise_state.update(x)
        xm = add_measurement_noise(x, world.noise, t, rng, noise_state)

        # --- state derivative estimate (backward difference path)
        if cfg.xdot_source == "backward_difference":
            xdot = (xm - xm_prev) / dt if i >= 1 else np.zeros(n)

        # --- control
        warm = i < delay_steps + 1
        d_hat = None
        v_hat = None
        if warm or cfg.controller == "zero":
            u = np.zeros(m)
            u0 = np.zeros(m)
            du = np.zeros(m)
            gphi = None
        else:
            gphi = kernels.monomial_grad(exps, xm)
            u0 = hu[(i - delay_steps) % H]
            if cfg.controller == "iadp":
                u = kernels.saturated_control(g_bar, gphi, w, beta)
            elif cfg.controller == "zsadp":
                u = kernels.saturated_control(zsadp.g, gphi, w, beta)
                d_hat = zsadp.k.T @ (gphi.T @ w) / (2.0 * cfg.gamma ** 2)
            else:
                u = kernels.saturated_control(tadp.g, gphi, w, beta)
                v_hat = -tadp.h.T @ (gphi.T @ w) / (2.0 * cfg.rho)
            du = u - u0
        if np.any(np.abs(u) > clamp):
            raise FloatingPointError("saturation invariant violated")

        # --- disturbance actually applied at the sample time (for log / gt xdot)
        d_val = disturbance_value(world.disturbance, x, t)
        if cfg.xdot_source == "ground_truth":
            xdot = eval_dynamics(world.plant, x, u, d_val, t) if i >= 0 else np.zeros(n)

        hi = i % H
        hx[hi] = xm
        hxd[hi] = xdot
        hu[hi] = u

        theta_tilde = 0.0
        xi = np.zeros(m)
        if not warm:
            x0dot = hxd[(i - delay_steps) % H]
            dxdot = xdot - x0dot
            xi = g_bar_pinv @ dxdot - du
            if cfg.learning_enabled and cfg.controller != "zero":
                if cfg.controller == "iadp":
                    Y = gphi @ (g_bar @ du + x0dot)
                    theta = float(xm @ Q @ xm) + kernels.penalty_sat(u, beta) \
                        + c_bar2 * float(du @ du)
                elif cfg.controller == "zsadp":
                    Y = gphi @ xdot
                    theta = float(xm @ Q @ xm) + kernels.penalty_sat(u, beta) \
                        - cfg.gamma * float(d_hat.T @ d_hat)
                else:
                    Y = gphi @ xdot
                    theta = float(xm @ Q @ xm) + kernels.penalty_sat(u, beta) \
                        + cfg.rho * float(v_hat.T @ v_hat) \
                        + (tadp.l_M_coeff ** 2 + tadp.d_M_coeff ** 2) * float(xm @ xm)
                theta_tilde = float(theta + w @ Y)
                wdot = kernels.weight_derivative_kernel(
                    w, Y, theta, buf.Y, buf.Theta, gains.Gamma, gains.k_c, gains.k_e)
                w = w + dt * wdot
                if not np.all(np.isfinite(w)):
                    log.diverged = True
                    log.diverged_step = i
                    w = np.where(np.isfinite(w), w, 0.0)

                # buffer collection: cadence during the excitation phase, then
                # keep collecting while the rank condition is unmet
                if i % cfg.buffer_every == 0 and np.all(np.isfinite(Y)) \
                        and np.isfinite(theta):
                    want = t < cfg.buffer_until or not rank_complete
                    if want and (len(buf) < buf.capacity
                                 or buf.policy == "sigma_min_enrich"
                                 or not rank_complete):
                        if len(buf) >= buf.capacity and buf.policy == "sequential_fill":
                            # rank still short past the fill phase: enrich instead
                            buf.policy = "sigma_min_enrich"
                        ins, rep = try_insert(buf, Y, theta)
                        if ins:
                            rank_val, sigma_min = rep.rank, rep.sigma_min
                            rank_complete = rank_val >= N
                if t >= cfg.rank_deadline and not rank_complete:
                    log.insufficient_excitation = True

        # --- log row
        log.x_true[i] = x
        log.x_meas[i] = xm
        log.u[i] = u
        log.du[i] = du
        log.w[i] = w
        log.theta_tilde[i] = theta_tilde
        log.xi[i] = xi
        log.d[i] = d_val[0] if d_val.shape[0] == 1 else np.linalg.norm(d_val)
        log.rank[i] = rank_val
        u_sq = float(u @ u)
        x_sq = float(x @ x)
        if i > 0:
            log.E_u[i] = log.E_u[i - 1] + 0.5 * dt * (prev_u_sq + u_sq)
            log.E_x[i] = log.E_x[i - 1] + 0.5 * dt * (prev_x_sq + x_sq)
        prev_u_sq, prev_x_sq = u_sq, x_sq
        xm_prev = xm

        if log.diverged:
            break

        # --- integrate
        if i < steps:
            if fused:
                x = kernels.pendulum_rk4(x, u[0], pparams, dparams, t, dt)
            else:
                x = rk4_step(world.plant, x, u,
                             lambda xs, ts: disturbance_value(world.disturbance, xs, ts),
                             t, dt)
            if not np.all(np.isfinite(x)) or np.linalg.norm(x) > DIVERGENCE_NORM:
                log.diverged = True
                log.diverged_step = i + 1
                x = np.where(np.isfinite(x), x, np.sign(x) * DIVERGENCE_NORM)
                x = np.nan_to_num(x, nan=DIVERGENCE_NORM,
                                  posinf=DIVERGENCE_NORM, neginf=-DIVERGENCE_NORM)

            # --- events fire at the time the step lands on
            fired = apply_event_schedule(schedule, (i + 1) * dt, world)
            if fired:
                log.fired_events.extend((ev.time, ev.action) for ev in fired)
                fused = world.plant.pendulum_params is not None and m == 1 and n == 2
                pparams = world.plant.pendulum_params
                dparams = world.disturbance.packed()
                if cfg.baselines_track_swap:
                    g_new, k_new = _plant_matrices(world.plant, x)
                    if zsadp is not None:
                        zsadp.g, zsadp.k = g_new, k_new
                    if tadp is not None:
                        tadp.rebind(g_new, k_new)

            if log.diverged:
                # record the diverged state row, then stop
                log.x_true[i + 1] = x
                log.x_meas[i + 1] = x
                log.w[i + 1] = w
                log.rank[i + 1] = rank_val
                log.E_u[i + 1] = log.E_u[i]
                log.E_x[i + 1] = log.E_x[i]
                break

    np.seterr(**_err)
    rows = log.diverged_step + 1 if log.diverged else S
    if log.diverged:
        for name in ("t", "x_true", "x_meas", "u", "du", "w", "theta_tilde",
                     "xi", "d", "E_u", "E_x", "rank"):
            setattr(log, name, getattr(log, name)[:rows])
    log.buffer_sigma_min = sigma_min
    log.wall_time = time.perf_counter() - t_start
    return log


def accumulate_metrics(log: TrajectoryLog) -> Metrics:
    """Trapezoidal running integrals of ||u||^2 and ||x||^2 over the log."""
    dt = np.diff(log.t)
    u_sq = np.sum(log.u * log.u, axis=1)
    x_sq = np.sum(log.x_true * log.x_true, axis=1)
    E_u = np.concatenate([[0.0], np.cumsum(0.5 * dt * (u_sq[:-1] + u_sq[1:]))])
    E_x = np.concatenate([[0.0], np.cumsum(0.5 * dt * (x_sq[:-1] + x_sq[1:]))])
    return Metrics(E_u=E_u, E_x=E_x)
