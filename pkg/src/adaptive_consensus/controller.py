"""Distributed adaptive control law with projection-based weight estimators.

Agent ``i`` applies

    u_i = -k_i (x_i - r_i) - w_i x_i - sum_{j ~ i} w_ij x_j

and adapts its estimates with

    w_i'  = gamma_i  Proj(w_i,  x_i (x_i - r_i))
    w_ij' = gamma_ij Proj(w_ij, x_j (x_i - r_i))

so it only ever reads its own state, its reference, and its neighbours' states.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .errors import DimensionError, ProjectionConfigError, ScenarioError
from .plant import _edge_sum, edge_arrays

DEFAULT_THETA_MAX = 10.0
DEFAULT_EPSILON = 0.1
DEFAULT_GAIN = 5.0
DEFAULT_LEARNING_RATE = 5.0


def _check_projection(theta_max, eps):
    if not theta_max > 0 or not math.isfinite(theta_max):
        raise ProjectionConfigError(f"theta_max must be positive and finite, got {theta_max}")
    if not 0 < eps < 1:
        raise ProjectionConfigError(f"epsilon must lie in (0, 1), got {eps}")


@njit(cache=True)
def proj_scalar(theta, y, theta_max, eps):
    tm2 = theta_max * theta_max
    f = (theta * theta - tm2) / (eps * tm2)
    if f > 0.0 and theta * y > 0.0:
        return y * (1.0 - f)
    return y


def proj(theta, y, theta_max, eps):
    """Smooth scalar projection.

    With ``f(theta) = (theta**2 - theta_max**2) / (eps * theta_max**2)`` the
    update ``y`` passes unchanged inside ``|theta| <= theta_max`` or when it
    points inward, and is scaled by ``1 - f`` otherwise. The set
    ``|theta| <= theta_max * sqrt(1 + eps)`` is therefore invariant.
    """
    _check_projection(theta_max, eps)
    return float(proj_scalar(float(theta), float(y), float(theta_max), float(eps)))


def proj_array(theta, y, theta_max, eps):
    tm2 = theta_max * theta_max
    f = (theta * theta - tm2) / (eps * tm2)
    return np.where((f > 0.0) & (theta * y > 0.0), y * (1.0 - f), y)


def projection_radius(theta_max, eps):
    """Radius of the invariant set of the projected estimator."""
    return theta_max * math.sqrt(1.0 + eps)


def _as_tuple(v, n, name):
    if np.ndim(v) == 0:
        return (float(v),) * n
    v = tuple(float(a) for a in v)
    if len(v) != n:
        raise DimensionError(f"{name} must have length {n}, got {len(v)}")
    return v


@dataclass(frozen=True)
class ControllerConfig:
    """Gains, learning rates, projection bounds and initial estimates.

    Edge-indexed entries follow ``graph.directed_edges``.
    """

    k: tuple
    gamma_node: tuple
    gamma_edge: tuple
    theta_max: float = DEFAULT_THETA_MAX
    epsilon: float = DEFAULT_EPSILON
    w_hat0_node: tuple = ()
    w_hat0_edge: tuple = ()

    @classmethod
    def build(cls, g, k=None, gamma_node=DEFAULT_LEARNING_RATE, gamma_edge=DEFAULT_LEARNING_RATE,
              theta_max=DEFAULT_THETA_MAX, epsilon=DEFAULT_EPSILON, w_hat0_node=0.0, w_hat0_edge=0.0):
        """Broadcast scalars; ``k`` defaults to 5 on the first two agents, 0 elsewhere."""
        m = len(g.directed_edges)
        if k is None:
            k = [DEFAULT_GAIN if i < 2 else 0.0 for i in range(g.n)]
        return cls(
            k=_as_tuple(k, g.n, "k"),
            gamma_node=_as_tuple(gamma_node, g.n, "gamma_node"),
            gamma_edge=_as_tuple(gamma_edge, m, "gamma_edge"),
            theta_max=float(theta_max),
            epsilon=float(epsilon),
            w_hat0_node=_as_tuple(w_hat0_node, g.n, "w_hat0_node"),
            w_hat0_edge=_as_tuple(w_hat0_edge, m, "w_hat0_edge"),
        )

    def validate(self, g, prefix="controller"):
        m = len(g.directed_edges)
        for name, vals, size in (("k", self.k, g.n), ("gamma_node", self.gamma_node, g.n),
                                 ("gamma_edge", self.gamma_edge, m),
                                 ("w_hat0_node", self.w_hat0_node, g.n),
                                 ("w_hat0_edge", self.w_hat0_edge, m)):
            if len(vals) != size:
                raise ScenarioError(f"expected {size} entries, got {len(vals)}", f"{prefix}.{name}")
            if not all(math.isfinite(v) for v in vals):
                raise ScenarioError("entries must be finite", f"{prefix}.{name}")
        if any(v < 0 for v in self.k):
            raise ScenarioError("gains must be nonnegative", f"{prefix}.k")
        if not any(v > 0 for v in self.k):
            raise ScenarioError("at least one gain must be strictly positive", f"{prefix}.k")
        for name in ("gamma_node", "gamma_edge"):
            if not all(v > 0 for v in getattr(self, name)):
                raise ScenarioError("learning rates must be strictly positive", f"{prefix}.{name}")
        if not (self.theta_max > 0 and math.isfinite(self.theta_max)):
            raise ScenarioError("must be positive", f"{prefix}.theta_max")
        if not 0 < self.epsilon < 1:
            raise ScenarioError("must lie in (0, 1)", f"{prefix}.epsilon")
        bound = self.theta_max
        for name in ("w_hat0_node", "w_hat0_edge"):
            if any(abs(v) > bound for v in getattr(self, name)):
                raise ScenarioError(f"initial estimates must satisfy |w| <= theta_max={bound}",
                                    f"{prefix}.{name}")

    @property
    def radius(self):
        return projection_radius(self.theta_max, self.epsilon)

    def initial_estimates(self):
        return EstimatorState(np.array(self.w_hat0_node, dtype=float), np.array(self.w_hat0_edge, dtype=float))


@dataclass
class EstimatorState:
    """Node estimates ``node[i-1]`` and edge estimates in directed-edge order."""

    node: np.ndarray
    edge: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def zeros(cls, g):
        return cls(np.zeros(g.n), np.zeros(len(g.directed_edges)))

    @classmethod
    def from_maps(cls, g, node=None, edge=None):
        node = node or {}
        edge = edge or {}
        return cls(np.array([float(node.get(i, 0.0)) for i in range(1, g.n + 1)]),
                   np.array([float(edge.get(e, 0.0)) for e in g.directed_edges]))

    def edge_map(self, g):
        return {e: float(v) for e, v in zip(g.directed_edges, self.edge)}

    def estimation_errors(self, w_node, w_edge):
        return self.node - w_node, self.edge - w_edge


def _checked(cfg, est, g, x, r):
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if x.shape != (g.n,) or r.shape != (g.n,):
        raise DimensionError(f"x and r must have shape ({g.n},)")
    if est.node.shape != (g.n,) or est.edge.shape != (len(g.directed_edges),):
        raise DimensionError("estimator state does not match the graph")
    if len(cfg.k) != g.n:
        raise DimensionError("gain vector does not match the graph")
    return x, r


def control_arrays(k, src, dst, x, r, w_node, w_edge):
    return -k * (x - r) - w_node * x - _edge_sum(src, w_edge * x[dst], x.size)


def estimator_arrays(gamma_node, gamma_edge, theta_max, eps, src, dst, x, r, w_node, w_edge):
    e = x - r
    d_node = gamma_node * proj_array(w_node, x * e, theta_max, eps)
    d_edge = gamma_edge * proj_array(w_edge, x[dst] * e[src], theta_max, eps)
    return d_node, d_edge


def control_input(cfg, est, g, x, r):
    x, r = _checked(cfg, est, g, x, r)
    src, dst = edge_arrays(g)
    return control_arrays(np.array(cfg.k), src, dst, x, r, est.node, est.edge)


def estimator_rhs(cfg, est, g, x, r):
    """Time derivatives ``(node, edge)`` of the estimates."""
    x, r = _checked(cfg, est, g, x, r)
    _check_projection(cfg.theta_max, cfg.epsilon)
    src, dst = edge_arrays(g)
    return estimator_arrays(np.array(cfg.gamma_node), np.array(cfg.gamma_edge), cfg.theta_max,
                            cfg.epsilon, src, dst, x, r, est.node, est.edge)


@dataclass
class AuditReport:
    passed: bool
    violations: list

    def __bool__(self):
        return self.passed


def distributedness_audit(cfg, g, control_fn=control_input, estimator_fn=estimator_rhs, probes=3):
    """Probe which inputs each agent's control and update laws depend on.

    For every agent ``i`` the audit perturbs each input agent ``i`` must not
    read (states of non-neighbours, other agents' references and estimates)
    and checks that ``u_i`` and the derivatives of agent ``i``'s estimates are
    bit-for-bit unchanged. The laws are linear in the perturbed quantities
    for fixed estimates, so a handful of deterministic base points suffices.
    """
    rng = np.random.default_rng(20150101)
    edge_of = g.directed_edges
    violations = []
    for probe in range(probes):
        x = rng.uniform(-2, 2, g.n)
        r = rng.uniform(-2, 2, g.n)
        est = EstimatorState(rng.uniform(-1, 1, g.n), rng.uniform(-1, 1, len(edge_of)))
        u0 = control_fn(cfg, est, g, x, r)
        dn0, de0 = estimator_fn(cfg, est, g, x, r)

        def outputs_of(i, u, dn, de):
            own = [s for s, (a, _) in enumerate(edge_of) if a == i]
            return np.concatenate([[u[i - 1], dn[i - 1]], de[own]])

        for i in range(1, g.n + 1):
            base = outputs_of(i, u0, dn0, de0)
            allowed = {i, *g.neighbors(i)}
            perturbations = []
            for m in range(1, g.n + 1):
                if m not in allowed:
                    perturbations.append((f"x_{m}", "x", m - 1))
                if m != i:
                    perturbations.append((f"r_{m}", "r", m - 1))
                    perturbations.append((f"w_hat_{m}", "node", m - 1))
            for s, (a, b) in enumerate(edge_of):
                if a != i:
                    perturbations.append((f"w_hat_{a}_{b}", "edge", s))
            for label, which, idx in perturbations:
                xp, rp = x.copy(), r.copy()
                ep = EstimatorState(est.node.copy(), est.edge.copy())
                target = {"x": xp, "r": rp, "node": ep.node, "edge": ep.edge}[which]
                target[idx] += 1.0 + probe
                u = control_fn(cfg, ep, g, xp, rp)
                dn, de = estimator_fn(cfg, ep, g, xp, rp)
                if not np.array_equal(outputs_of(i, u, dn, de), base):
                    violations.append(f"agent {i} depends on {label}")
    violations = sorted(set(violations))
    return AuditReport(not violations, violations)
