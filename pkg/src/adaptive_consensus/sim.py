"""Deterministic fixed-step simulation of the coupled closed loop."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import kernels
from .analysis import consensus_gap_series, lyapunov_series
from .controller import EstimatorState
from .errors import DivergenceError, ScenarioError
from .plant import edge_arrays, reference_weights, weighted_degree

INTEGRATORS = tuple(kernels.METHODS)


@dataclass(frozen=True)
class SimConfig:
    h: float = 1e-3
    T: float = 15.0
    integrator: str = "rk4"
    stride: int = 1

    def validate(self, prefix="sim"):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ScenarioError("step size must be positive", f"{prefix}.h")
        if not (math.isfinite(self.T) and self.T >= self.h):
            raise ScenarioError("horizon must be at least one step", f"{prefix}.T")
        if self.integrator not in kernels.METHODS:
            raise ScenarioError(f"must be one of {INTEGRATORS}", f"{prefix}.integrator")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ScenarioError("must be a positive integer", f"{prefix}.stride")
        steps = round(self.T / self.h)
        if abs(steps * self.h - self.T) > 1e-9 * max(1.0, self.T):
            raise ScenarioError(f"horizon {self.T} is not a whole number of steps of {self.h}", f"{prefix}.T")
        if steps % self.stride:
            raise ScenarioError(f"stride must divide the step count {steps}", f"{prefix}.stride")

    @property
    def nsteps(self):
        return round(self.T / self.h)


@dataclass
class SimState:
    t: float
    x: np.ndarray
    r: np.ndarray
    est: EstimatorState

    def pack(self):
        return np.concatenate([self.x, self.r, self.est.node, self.est.edge]).astype(float)

    @classmethod
    def unpack(cls, t, y, n):
        return cls(float(t), y[:n].copy(), y[n:2 * n].copy(),
                   EstimatorState(y[2 * n:3 * n].copy(), y[3 * n:].copy()))


@dataclass
class Trajectory:
    """Recorded rows of a run, one per ``stride`` steps.

    Array attributes are indexed ``[row, agent]`` (or ``[row, directed edge]``
    for ``w_hat_edge``). ``V`` is the Lyapunov candidate along the run; for
    runs without a controller it reduces to ``0.5 * |e|^2``.
    """

    name: str
    graph: object
    t: np.ndarray
    x: np.ndarray
    r: np.ndarray
    w_hat_node: np.ndarray
    w_hat_edge: np.ndarray
    target: float
    V: np.ndarray = field(default=None, repr=False)
    diverged_at: float = None

    @cached_property
    def e(self):
        return self.x - self.r

    @cached_property
    def e_norm(self):
        return np.linalg.norm(self.e, axis=1)

    @cached_property
    def consensus_gap(self):
        return consensus_gap_series(self.x, self.target)

    def __len__(self):
        return self.t.size

    def final_state(self):
        return SimState(float(self.t[-1]), self.x[-1].copy(), self.r[-1].copy(),
                        EstimatorState(self.w_hat_node[-1].copy(), self.w_hat_edge[-1].copy()))


def pack_params(scenario, alpha_sign=-1.0):
    g = scenario.graph
    src, dst = edge_arrays(g)
    xi = reference_weights(g, scenario.reference_weights)
    ctrl = scenario.controller
    m = src.size
    if ctrl is not None:
        k, gn, ge = np.array(ctrl.k), np.array(ctrl.gamma_node), np.array(ctrl.gamma_edge)
        theta_max, eps = float(ctrl.theta_max), float(ctrl.epsilon)
    else:
        k, gn, ge = np.zeros(g.n), np.ones(g.n), np.ones(m)
        theta_max, eps = 1.0, 0.5
    return kernels.Params(
        n=int(g.n),
        src=src,
        dst=dst,
        alpha_rows=scenario.coefficients.alpha_rows(),
        beta_rows=scenario.coefficients.beta_rows(),
        xi=xi,
        wdeg=weighted_degree(xi, src, g.n),
        k=k.astype(float),
        gamma_node=gn.astype(float),
        gamma_edge=ge.astype(float),
        theta_max=theta_max,
        eps=eps,
        controller_on=ctrl is not None,
        alpha_sign=float(alpha_sign),
    )


def initial_state(scenario):
    g = scenario.graph
    x0 = np.array(scenario.x0, dtype=float)
    r0 = np.array(scenario.r0 if scenario.r0 is not None else scenario.x0, dtype=float)
    if scenario.controller is not None:
        est = scenario.controller.initial_estimates()
    else:
        est = EstimatorState.zeros(g)
    return SimState(0.0, x0, r0, est)


def step(state, cfg, scenario):
    """Advance ``state`` by one step of ``cfg.integrator``."""
    y = kernels.step_once(kernels.CLOSED_LOOP, kernels.METHODS[cfg.integrator], float(state.t),
                          float(cfg.h), state.pack(), pack_params(scenario))
    t = state.t + cfg.h
    if not np.all(np.abs(y) <= kernels.DIVERGENCE_LIMIT):
        raise DivergenceError(t)
    return SimState.unpack(t, y, scenario.graph.n)


def _integrate(scenario, cfg, kind, y0, params):
    rows, filled, status, fail_t = kernels.integrate(
        kind, kernels.METHODS[cfg.integrator], y0, 0.0, float(cfg.h), int(cfg.nsteps), int(cfg.stride), params)
    return rows[:filled], status == kernels.DIVERGED, fail_t


def run(scenario, cfg=None):
    """Simulate ``scenario`` over ``[0, cfg.T]`` (``cfg`` defaults to ``scenario.sim``).

    Raises :class:`DivergenceError` carrying the partial trajectory if the
    state blows up.
    """
    cfg = cfg or scenario.sim
    cfg.validate()
    g = scenario.graph
    n = g.n
    rows, diverged, fail_t = _integrate(scenario, cfg, kernels.CLOSED_LOOP, initial_state(scenario).pack(),
                                        pack_params(scenario))
    traj = Trajectory(
        name=scenario.name,
        graph=g,
        t=rows[:, 0].copy(),
        x=rows[:, 1:1 + n].copy(),
        r=rows[:, 1 + n:1 + 2 * n].copy(),
        w_hat_node=rows[:, 1 + 2 * n:1 + 3 * n].copy(),
        w_hat_edge=rows[:, 1 + 3 * n:].copy(),
        target=float(np.mean(scenario.x0)),
        diverged_at=fail_t if diverged else None,
    )
    traj.V = lyapunov_series(traj, scenario)
    if diverged:
        raise DivergenceError(fail_t, partial=traj)
    return traj


def run_batch(scenarios, cfg=None, workers=None):
    """Run independent scenarios in parallel threads; results keep input order.

    Each entry is a :class:`Trajectory` or the :class:`DivergenceError` raised.
    """
    def one(sc):
        try:
            return run(sc, cfg)
        except DivergenceError as err:
            return err

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, scenarios))


def dual_run_consistency(scenario, cfg=None, mismatched=False):
    """Sup-norm gap between ``x - r`` of the direct closed loop and ``e`` of the error-form system.

    Both systems are integrated with identical steps; the gap only measures
    whether the error dynamics are algebraically the same vector field.
    ``mismatched=True`` uses ``w_i = d_i + alpha_i`` in the error form as a
    negative control.
    """
    if scenario.controller is None:
        raise ScenarioError("dual-run consistency needs an enabled controller", "controller")
    cfg = replace(cfg or scenario.sim, stride=1)
    cfg.validate()
    n = scenario.graph.n
    y0 = initial_state(scenario).pack()
    direct, bad1, t1 = _integrate(scenario, cfg, kernels.CLOSED_LOOP, y0, pack_params(scenario))
    ey0 = y0.copy()
    ey0[:n] = y0[:n] - y0[n:2 * n]
    errform, bad2, t2 = _integrate(scenario, cfg, kernels.ERROR_FORM, ey0,
                                   pack_params(scenario, alpha_sign=1.0 if mismatched else -1.0))
    if bad1 or bad2:
        raise DivergenceError(t1 if bad1 else t2)
    return float(np.max(np.abs((direct[:, 1:1 + n] - direct[:, 1 + n:1 + 2 * n]) - errform[:, 1:1 + n])))
