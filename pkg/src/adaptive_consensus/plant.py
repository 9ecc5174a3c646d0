"""Vector fields of the uncertain network, the reference model and the error system.

The ``*_arrays`` functions work on packed numpy arrays (directed edge lists
``src -> dst`` in the graph's canonical order, 0-based) and are what the
numpy simulation backend calls. The remaining functions are the checked,
graph-level API.
"""
import numpy as np

from .errors import DimensionError, ScenarioError
from .uncertainty import eval_rows


def edge_arrays(g):
    """0-based ``(src, dst)`` arrays over ``g.directed_edges``."""
    de = np.array(g.directed_edges, dtype=np.int64).reshape(-1, 2) - 1
    return de[:, 0].copy(), de[:, 1].copy()


def _edge_sum(src, vals, n):
    return np.bincount(src, weights=vals, minlength=n)


def plant_rhs_arrays(alpha, beta, src, dst, x, u):
    return -alpha * x + _edge_sum(src, beta * x[dst], x.size) + u


def reference_rhs_arrays(xi, src, dst, r):
    return _edge_sum(src, xi * (r[dst] - r[src]), r.size)


def weighted_degree(xi, src, n):
    return _edge_sum(src, xi, n)


def true_weights_arrays(alpha, beta, xi, src, n, alpha_sign=-1.0):
    """Ideal controller weights ``(w_node, w_edge)``.

    ``w_i = sum_j xi_ij - alpha_i`` and ``w_ij = beta_ij - xi_ij``; with unit
    reference weights these are ``d_i - alpha_i`` and ``beta_ij - 1``.
    ``alpha_sign=+1`` flips the sign of alpha and exists only as a broken
    variant for negative-control tests.
    """
    return weighted_degree(xi, src, n) + alpha_sign * alpha, beta - xi


def error_rhs_arrays(k, xi, src, dst, e, x, wt_node, wt_edge):
    n = e.size
    return (-k * e + _edge_sum(src, xi * (e[dst] - e[src]), n)
            - wt_node * x - _edge_sum(src, wt_edge * x[dst], n))


def _check_vec(name, v, n):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise DimensionError(f"{name} must have shape ({n},), got {v.shape}")
    return v


def reference_weights(g, xi=None):
    """Per-directed-edge reference weights, all ones by default.

    ``xi`` maps edges to positive weights; giving one orientation sets both,
    giving both requires them to agree.
    """
    if xi is None:
        return np.ones(len(g.directed_edges))
    out = {}
    for (i, j), v in dict(xi).items():
        v = float(v)
        if not g.has_edge(i, j):
            raise ScenarioError(f"({i}, {j}) is not an edge", "reference_weights")
        if not v > 0:
            raise ScenarioError(f"weight on ({i}, {j}) must be positive", "reference_weights")
        for key in ((i, j), (j, i)):
            if out.setdefault(key, v) != v:
                raise ScenarioError(f"weights on ({i}, {j}) and ({j}, {i}) differ", "reference_weights")
    return np.array([out.get(e, 1.0) for e in g.directed_edges])


def plant_rhs(g, coeffs, x, u, t):
    """``x_i' = -alpha_i(t) x_i + sum_j beta_ij(t) x_j + u_i``."""
    x = _check_vec("x", x, g.n)
    u = _check_vec("u", u, g.n)
    src, dst = edge_arrays(g)
    return plant_rhs_arrays(eval_rows(coeffs.alpha_rows(), t), eval_rows(coeffs.beta_rows(), t), src, dst, x, u)


def reference_rhs(g, r, xi=None):
    """``r_i' = -sum_j xi_ij (r_i - r_j)``, i.e. ``-L r`` for unit weights."""
    r = _check_vec("r", r, g.n)
    src, dst = edge_arrays(g)
    return reference_rhs_arrays(reference_weights(g, xi), src, dst, r)


def reference_fixed_point(x0):
    """Limit of every reference state: the mean of the initial condition."""
    return float(np.mean(np.asarray(x0, dtype=float)))


def true_weights(g, coeffs, t, xi=None):
    src, _ = edge_arrays(g)
    return true_weights_arrays(eval_rows(coeffs.alpha_rows(), t), eval_rows(coeffs.beta_rows(), t),
                               reference_weights(g, xi), src, g.n)


def ideal_control_oracle(g, coeffs, x, t, xi=None):
    """Control that cancels the uncertainty exactly, given the true coefficients.

    Not implementable by the agents (they do not know alpha, beta); used as a
    ground-truth comparator in tests.
    """
    x = _check_vec("x", x, g.n)
    src, dst = edge_arrays(g)
    w_node, w_edge = true_weights(g, coeffs, t, xi)
    return -w_node * x - _edge_sum(src, w_edge * x[dst], g.n)


def error_rhs(g, coeffs, k, w_hat_node, w_hat_edge, x, r, t, xi=None):
    """Tracking-error derivative written through the estimation errors.

    ``e_i' = -k_i e_i - sum_j xi_ij (e_i - e_j) - wt_i x_i - sum_j wt_ij x_j``
    with ``wt = w_hat - w``.
    """
    x = _check_vec("x", x, g.n)
    r = _check_vec("r", r, g.n)
    k = _check_vec("k", k, g.n)
    w_hat_node = _check_vec("w_hat_node", w_hat_node, g.n)
    w_hat_edge = _check_vec("w_hat_edge", w_hat_edge, len(g.directed_edges))
    src, dst = edge_arrays(g)
    w_node, w_edge = true_weights(g, coeffs, t, xi)
    return error_rhs_arrays(k, reference_weights(g, xi), src, dst, x - r, x,
                            w_hat_node - w_node, w_hat_edge - w_edge)
