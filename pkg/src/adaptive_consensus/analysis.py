"""Lyapunov and consensus diagnostics.

Everything here uses the true coefficients of a scenario, which the agents
themselves never see. Diagnostics are evaluated on recorded trajectories.
"""
import math
from dataclasses import dataclass

import numpy as np

from .graph import lemma1_certificate
from .plant import edge_arrays, reference_weights, true_weights_arrays
from .uncertainty import eval_rows_grid

AT_AVERAGE = "consensus-at-average"
ELSEWHERE = "consensus-elsewhere"
NO_CONSENSUS = "no-consensus"

DIAGNOSTIC_COLUMNS = ("t", "V", "V_dot_estimate", "e_norm", "bound", "consensus_gap")


def consensus_gap_series(x, target):
    return np.max(np.abs(np.atleast_2d(x) - target), axis=1)


def lyapunov_value(e, w_tilde_node, w_tilde_edge, cfg=None):
    """``0.5 * (|e|^2 + sum wt_i^2 / gamma_i + sum wt_ij^2 / gamma_ij)``.

    ``w_tilde_*`` are the estimation errors ``w_hat - w``. Without a
    controller config only the tracking term remains.
    """
    e = np.asarray(e, dtype=float)
    v = float(e @ e)
    if cfg is not None:
        wn = np.asarray(w_tilde_node, dtype=float)
        we = np.asarray(w_tilde_edge, dtype=float)
        v += float(np.sum(wn * wn / np.array(cfg.gamma_node)))
        v += float(np.sum(we * we / np.array(cfg.gamma_edge))) if we.size else 0.0
    return 0.5 * v


def true_weight_series(scenario, times):
    """True weights on a time grid, shapes ``(N, n)`` and ``(N, m)``."""
    g = scenario.graph
    src, _ = edge_arrays(g)
    xi = reference_weights(g, scenario.reference_weights)
    alpha = eval_rows_grid(scenario.coefficients.alpha_rows(), times)
    beta = eval_rows_grid(scenario.coefficients.beta_rows(), times)
    w_node, w_edge = true_weights_arrays(alpha, beta, xi, src, g.n)
    return w_node, w_edge


def lyapunov_series(traj, scenario):
    e = traj.x - traj.r
    v = np.sum(e * e, axis=1)
    cfg = scenario.controller
    if cfg is not None:
        w_node, w_edge = true_weight_series(scenario, traj.t)
        wn = traj.w_hat_node - w_node
        we = traj.w_hat_edge - w_edge
        v = v + np.sum(wn * wn / np.array(cfg.gamma_node), axis=1)
        if we.shape[1]:
            v = v + np.sum(we * we / np.array(cfg.gamma_edge), axis=1)
    return 0.5 * v


def v_dot_estimate(t, V):
    """Central differences in the interior, one-sided at the ends."""
    if len(V) < 2:
        return np.zeros(len(V))
    return np.gradient(V, t)


def node_perturbation_bounds(coeffs, cfg, g):
    """Per-agent bound on ``|gamma^-1 wt w' + sum_j gamma_ij^-1 wt_ij w_ij'|``.

    Every estimation error is bounded by the diameter of the projection set,
    ``2 * theta_max * sqrt(1 + eps)``, and every weight derivative by the
    derivative bound of the coefficient it comes from.
    """
    spread = 2.0 * cfg.theta_max * math.sqrt(1.0 + cfg.epsilon)
    out = np.zeros(g.n)
    for i in range(1, g.n + 1):
        out[i - 1] = coeffs.alpha[i].derivative_bound / cfg.gamma_node[i - 1]
    for s, (i, j) in enumerate(g.directed_edges):
        out[i - 1] += coeffs.beta[(i, j)].derivative_bound / cfg.gamma_edge[s]
    return spread * out


def perturbation_bound(coeffs, cfg, g):
    """Total perturbation bound ``w*``; zero when every coefficient is constant."""
    return float(np.sum(node_perturbation_bounds(coeffs, cfg, g)))


def ultimate_bound(g, k, w_star):
    """``w* / lambda_min(L + K)``."""
    lam, _ = lemma1_certificate(g, k)
    return w_star / lam


def decrease_radius(g, k, w_star):
    """Error norm beyond which the Lyapunov derivative bound is nonpositive.

    From ``V' <= -lambda_min |e|^2 + w*`` this is ``sqrt(w* / lambda_min)``.
    """
    lam, _ = lemma1_certificate(g, k)
    return math.sqrt(w_star / lam)


@dataclass(frozen=True)
class ConsensusReport:
    target: float
    final_gap: float
    final_spread: float
    settling_time: float
    verdict: str
    tol: float

    def as_dict(self):
        return {
            "target": self.target,
            "final_gap": self.final_gap,
            "final_spread": self.final_spread,
            "settling_time": self.settling_time,
            "verdict": self.verdict,
            "tolerance": self.tol,
        }


def settling_time(t, gap, tol):
    """First recorded time after which ``gap`` stays below ``tol``; None if it never settles."""
    above = np.flatnonzero(gap >= tol)
    if above.size == 0:
        return float(t[0])
    last = above[-1]
    if last + 1 >= len(t):
        return None
    return float(t[last + 1])


def consensus_report(traj, x0, tol=1e-2):
    target = float(np.mean(x0))
    gap = consensus_gap_series(traj.x, target)
    xf = traj.x[-1]
    spread = float(np.max(xf) - np.min(xf))
    final_gap = float(gap[-1])
    if final_gap <= tol:
        verdict = AT_AVERAGE
    elif spread <= tol:
        verdict = ELSEWHERE
    else:
        verdict = NO_CONSENSUS
    return ConsensusReport(target, final_gap, spread, settling_time(traj.t, gap, tol), verdict, tol)


def diagnostics_table(traj, scenario):
    """Columns of :data:`DIAGNOSTIC_COLUMNS`; ``bound`` is NaN without a controller."""
    V = traj.V if traj.V is not None else lyapunov_series(traj, scenario)
    cfg = scenario.controller
    if cfg is not None:
        bound = ultimate_bound(scenario.graph, cfg.k, perturbation_bound(scenario.coefficients, cfg, scenario.graph))
    else:
        bound = math.nan
    return {
        "t": traj.t,
        "V": V,
        "V_dot_estimate": v_dot_estimate(traj.t, V),
        "e_norm": traj.e_norm,
        "bound": np.full(len(traj.t), bound),
        "consensus_gap": traj.consensus_gap,
    }


def max_step_increase(V):
    """Largest ``V[k+1] - V[k]`` over recorded steps (negative if strictly decreasing)."""
    return float(np.max(np.diff(V))) if len(V) > 1 else 0.0


def decrease_violations(t, V, e_norm, radius, tol=1e-6):
    """Indices where ``|e| >= radius`` yet the finite-difference ``V'`` exceeds ``tol``."""
    vdot = v_dot_estimate(t, V)
    return np.flatnonzero((e_norm >= radius) & (vdot > tol))
