"""Hot loops: closed-loop vector fields and the fixed-step integrator.

Two implementations of each vector field exist. The ``*_loops`` versions are
scalar loops written for numba; the ``*_numpy`` versions are assembled from
the vectorised array functions in :mod:`plant` and :mod:`controller`. The
integrator driver is shared and dispatches to whichever backend
:data:`adaptive_consensus._accel.USE_NUMBA` selects.

State layouts (``n`` agents, ``m`` directed edges):

* closed loop: ``[x (n), r (n), w_hat_node (n), w_hat_edge (m)]``
* error form:  ``[e (n), r (n), w_hat_node (n), w_hat_edge (m)]``
"""
from typing import NamedTuple

import numpy as np

from ._accel import USE_NUMBA, njit
from .controller import control_arrays, estimator_arrays, proj_scalar
from .plant import error_rhs_arrays, plant_rhs_arrays, reference_rhs_arrays, true_weights_arrays
from .uncertainty import eval_rows, signal_value

CLOSED_LOOP = 0
ERROR_FORM = 1
EULER = 0
RK4 = 1
METHODS = {"euler": EULER, "rk4": RK4}

OK = 0
DIVERGED = 1
DIVERGENCE_LIMIT = 1e9


class Params(NamedTuple):
    n: int
    src: np.ndarray
    dst: np.ndarray
    alpha_rows: np.ndarray
    beta_rows: np.ndarray
    xi: np.ndarray
    wdeg: np.ndarray
    k: np.ndarray
    gamma_node: np.ndarray
    gamma_edge: np.ndarray
    theta_max: float
    eps: float
    controller_on: bool
    alpha_sign: float


@njit(cache=True)
def closed_loop_rhs_loops(t, y, p, out):
    n = p.n
    for i in range(n):
        x = y[i]
        e = x - y[n + i]
        dx = -signal_value(p.alpha_rows[i], t) * x
        if p.controller_on:
            w = y[2 * n + i]
            dx += -p.k[i] * e - w * x
            out[2 * n + i] = p.gamma_node[i] * proj_scalar(w, x * e, p.theta_max, p.eps)
        else:
            out[2 * n + i] = 0.0
        out[i] = dx
        out[n + i] = 0.0
    for s in range(p.src.shape[0]):
        i = p.src[s]
        j = p.dst[s]
        xj = y[j]
        out[i] += signal_value(p.beta_rows[s], t) * xj
        out[n + i] += p.xi[s] * (y[n + j] - y[n + i])
        if p.controller_on:
            w = y[3 * n + s]
            out[i] -= w * xj
            out[3 * n + s] = p.gamma_edge[s] * proj_scalar(w, xj * (y[i] - y[n + i]), p.theta_max, p.eps)
        else:
            out[3 * n + s] = 0.0


@njit(cache=True)
def error_form_rhs_loops(t, y, p, out):
    n = p.n
    for i in range(n):
        e = y[i]
        x = e + y[n + i]
        w_true = p.wdeg[i] + p.alpha_sign * signal_value(p.alpha_rows[i], t)
        w = y[2 * n + i]
        out[i] = -p.k[i] * e - (w - w_true) * x
        out[n + i] = 0.0
        out[2 * n + i] = p.gamma_node[i] * proj_scalar(w, x * e, p.theta_max, p.eps)
    for s in range(p.src.shape[0]):
        i = p.src[s]
        j = p.dst[s]
        xj = y[j] + y[n + j]
        w_true = signal_value(p.beta_rows[s], t) - p.xi[s]
        w = y[3 * n + s]
        out[i] += p.xi[s] * (y[j] - y[i]) - (w - w_true) * xj
        out[n + i] += p.xi[s] * (y[n + j] - y[n + i])
        out[3 * n + s] = p.gamma_edge[s] * proj_scalar(w, xj * y[i], p.theta_max, p.eps)


@njit(cache=True)
def rhs_loops(kind, t, y, p, out):
    if kind == ERROR_FORM:
        error_form_rhs_loops(t, y, p, out)
    else:
        closed_loop_rhs_loops(t, y, p, out)


def closed_loop_rhs_numpy(t, y, p, out):
    n = p.n
    x, r, wn, we = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
    alpha = eval_rows(p.alpha_rows, t)
    beta = eval_rows(p.beta_rows, t)
    if p.controller_on:
        u = control_arrays(p.k, p.src, p.dst, x, r, wn, we)
        dn, de = estimator_arrays(p.gamma_node, p.gamma_edge, p.theta_max, p.eps, p.src, p.dst, x, r, wn, we)
    else:
        u = np.zeros(n)
        dn, de = np.zeros(n), np.zeros(we.size)
    out[:n] = plant_rhs_arrays(alpha, beta, p.src, p.dst, x, u)
    out[n:2 * n] = reference_rhs_arrays(p.xi, p.src, p.dst, r)
    out[2 * n:3 * n] = dn
    out[3 * n:] = de


def error_form_rhs_numpy(t, y, p, out):
    n = p.n
    e, r, wn, we = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
    x = e + r
    alpha = eval_rows(p.alpha_rows, t)
    beta = eval_rows(p.beta_rows, t)
    w_node, w_edge = true_weights_arrays(alpha, beta, p.xi, p.src, n, p.alpha_sign)
    out[:n] = error_rhs_arrays(p.k, p.xi, p.src, p.dst, e, x, wn - w_node, we - w_edge)
    out[n:2 * n] = reference_rhs_arrays(p.xi, p.src, p.dst, r)
    out[2 * n:3 * n], out[3 * n:] = estimator_arrays(p.gamma_node, p.gamma_edge, p.theta_max, p.eps,
                                                     p.src, p.dst, x, r, wn, we)


def rhs_numpy(kind, t, y, p, out):
    if kind == ERROR_FORM:
        error_form_rhs_numpy(t, y, p, out)
    else:
        closed_loop_rhs_numpy(t, y, p, out)


_rhs = rhs_loops if USE_NUMBA else rhs_numpy


@njit(cache=True)
def _advance(kind, method, t, h, y, p, k1, k2, k3, k4, tmp):
    _rhs(kind, t, y, p, k1)
    if method == EULER:
        y[:] = y + h * k1
        return
    tmp[:] = y + (0.5 * h) * k1
    _rhs(kind, t + 0.5 * h, tmp, p, k2)
    tmp[:] = y + (0.5 * h) * k2
    _rhs(kind, t + 0.5 * h, tmp, p, k3)
    tmp[:] = y + h * k3
    _rhs(kind, t + h, tmp, p, k4)
    y[:] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def step_once(kind, method, t, h, y, p):
    """One integrator step from ``(t, y)``; returns the new state."""
    out = y.copy()
    dim = y.size
    _advance(kind, method, t, h, out, p, np.empty(dim), np.empty(dim), np.empty(dim), np.empty(dim),
             np.empty(dim))
    return out


@njit(cache=True, nogil=True)
def integrate(kind, method, y0, t0, h, nsteps, stride, p):
    """Fixed-step integration recording every ``stride`` steps.

    Returns ``(rows, filled, status, fail_t)`` where ``rows[:filled]`` holds
    ``[t, *y]`` records. On a non-finite state or one exceeding
    :data:`DIVERGENCE_LIMIT` the loop stops with ``status = DIVERGED``.
    Times are computed as ``t0 + step * h`` so they do not accumulate error.
    """
    dim = y0.size
    rows = np.empty((nsteps // stride + 1, dim + 1))
    y = y0.copy()
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    tmp = np.empty(dim)
    rows[0, 0] = t0
    rows[0, 1:] = y
    filled = 1
    status = OK
    fail_t = 0.0
    for step in range(nsteps):
        _advance(kind, method, t0 + step * h, h, y, p, k1, k2, k3, k4, tmp)
        if not np.all(np.abs(y) <= DIVERGENCE_LIMIT):
            status = DIVERGED
            fail_t = t0 + (step + 1) * h
            break
        if (step + 1) % stride == 0:
            rows[filled, 0] = t0 + (step + 1) * h
            rows[filled, 1:] = y
            filled += 1
    return rows, filled, status, fail_t
