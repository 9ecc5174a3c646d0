import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_consensus.controller import (
    ControllerConfig,
    EstimatorState,
    control_input,
    distributedness_audit,
    estimator_rhs,
    proj,
    proj_array,
    projection_radius,
)
from adaptive_consensus.errors import DimensionError, ProjectionConfigError
from adaptive_consensus.graph import complete_graph, line_graph, random_connected_graph

TM, EPS = 10.0, 0.1


def cfg_for(g, **kw):
    return ControllerConfig.build(g, **kw)


def test_control_zero_when_tracking(line3):
    cfg = cfg_for(line3, k=(5, 5, 0))
    x = np.array([0.3, 0.1, -0.4])
    np.testing.assert_array_equal(control_input(cfg, EstimatorState.zeros(line3), line3, x, x), 0.0)


def test_control_node_terms(line3):
    cfg = cfg_for(line3, k=(5, 0, 0))
    est = EstimatorState.from_maps(line3, node={1: 1.0})
    u = control_input(cfg, est, line3, [1.0, 0.0, 0.0], np.zeros(3))
    assert u[0] == -6.0


def test_control_edge_term(line3):
    cfg = cfg_for(line3, k=(0, 0, 1))
    est = EstimatorState.from_maps(line3, edge={(1, 2): 0.5})
    u = control_input(cfg, est, line3, [0.0, 2.0, 0.0], np.zeros(3))
    assert u[0] == -1.0


def test_control_dimension_mismatch(line3):
    with pytest.raises(DimensionError):
        control_input(cfg_for(line3), EstimatorState.zeros(line3), line3, np.zeros(4), np.zeros(4))


def test_proj_interior():
    assert proj(0.0, 3.7, TM, EPS) == 3.7
    assert proj(0.0, -2.0, TM, EPS) == -2.0


def test_proj_outer_boundary_blocks_outward():
    assert proj(projection_radius(TM, EPS), 2.0, TM, EPS) == pytest.approx(0.0, abs=1e-12)
    assert proj(-projection_radius(TM, EPS), -2.0, TM, EPS) == pytest.approx(0.0, abs=1e-12)
    # inward motion is never modified
    assert proj(projection_radius(TM, EPS), -2.0, TM, EPS) == -2.0


def test_proj_halfway():
    theta = TM * math.sqrt(1 + EPS / 2)  # f(theta) = 0.5
    assert proj(theta, 1.0, TM, EPS) == pytest.approx(0.5, abs=1e-12)


def test_proj_branch_boundary():
    assert proj(TM, 1.0, TM, EPS) == 1.0


@pytest.mark.parametrize("tm, eps", [(0.0, 0.1), (-1.0, 0.1), (1.0, 0.0), (1.0, 1.0), (1.0, 1.5)])
def test_proj_rejects_bad_config(tm, eps):
    with pytest.raises(ProjectionConfigError):
        proj(0.0, 1.0, tm, eps)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1e3, 1e3), st.floats(0.1, 100.0), st.floats(0.01, 0.99))
def test_proj_identity_inside(frac, y, tm, eps):
    assert proj(frac * tm, y, tm, eps) == y


@settings(max_examples=300, deadline=None)
@given(st.floats(-1.2, 1.2), st.floats(-100, 100), st.floats(0.01, 0.99))
def test_proj_continuity(frac, y, eps):
    theta = frac * TM
    for d in (1e-4, 1e-6, 1e-8):
        jump = abs(proj(theta + d, y, TM, eps) - proj(theta, y, TM, eps))
        # Lipschitz in theta with constant |y| * max|f'| on the relevant range
        assert jump <= abs(y) * 2 * 1.21 * TM / (eps * TM ** 2) * d + 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-100, 100), st.floats(0.01, 0.99))
def test_proj_never_pushes_outside(frac, y, eps):
    theta = frac * projection_radius(TM, eps)
    p = proj(theta, y, TM, eps)
    if abs(theta) >= projection_radius(TM, eps) - 1e-12:
        assert theta * p <= 1e-9 * abs(y)
    assert proj_array(np.array([theta]), np.array([y]), TM, eps)[0] == p


def test_estimator_zero_when_tracking(line3):
    cfg = cfg_for(line3)
    est = EstimatorState(np.array([0.3, -1.0, 2.0]), np.arange(4.0))
    x = np.array([1.0, 2.0, 3.0])
    dn, de = estimator_rhs(cfg, est, line3, x, x)
    np.testing.assert_array_equal(dn, 0.0)
    np.testing.assert_array_equal(de, 0.0)


def test_estimator_interior_rate(line3):
    dn, de = estimator_rhs(cfg_for(line3), EstimatorState.zeros(line3), line3, [1.0, 0.0, 0.0], np.zeros(3))
    assert dn[0] == 5.0
    # w_12 uses the neighbour state x_2 = 0; w_21 uses e_2 = 0
    np.testing.assert_array_equal(de, 0.0)


def test_estimator_edge_regressor(line3):
    x = np.array([1.0, 2.0, -1.0])
    r = np.array([0.5, 0.0, 0.0])
    dn, de = estimator_rhs(cfg_for(line3, gamma_edge=2.0), EstimatorState.zeros(line3), line3, x, r)
    # (1,2): gamma * x_2 * e_1; (2,1): x_1 * e_2; (2,3): x_3 * e_2; (3,2): x_2 * e_3
    np.testing.assert_allclose(de, [2 * 2.0 * 0.5, 2 * 1.0 * 2.0, 2 * -1.0 * 2.0, 2 * 2.0 * -1.0])


def test_estimator_halts_at_boundary(line3):
    cfg = cfg_for(line3)
    est = EstimatorState(np.array([cfg.radius, 0.0, 0.0]), np.zeros(4))
    dn, _ = estimator_rhs(cfg, est, line3, [1.0, 0.0, 0.0], np.zeros(3))
    assert dn[0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("g", [line_graph(3), complete_graph(4), line_graph(6)])
def test_audit_passes(g):
    report = distributedness_audit(cfg_for(g), g)
    assert report.passed, report.violations


def test_audit_random_graphs(rng):
    for _ in range(10):
        g = random_connected_graph(int(rng.integers(2, 10)), rng, 0.2)
        assert distributedness_audit(cfg_for(g), g)


def test_audit_catches_non_neighbour_read(line3):
    def leaky(cfg, est, g, x, r):
        u = control_input(cfg, est, g, x, r)
        u[0] += 0.1 * x[2]  # agent 1 is not adjacent to agent 3
        return u

    report = distributedness_audit(cfg_for(line3), line3, control_fn=leaky)
    assert not report.passed
    assert "agent 1 depends on x_3" in report.violations


def test_audit_catches_global_reference(line3):
    def centralized(cfg, est, g, x, r):
        dn, de = estimator_rhs(cfg, est, g, x, r)
        return dn + np.mean(r), de

    assert not distributedness_audit(cfg_for(line3), line3, estimator_fn=centralized)


def test_config_defaults(line3):
    cfg = ControllerConfig.build(line3)
    assert cfg.k == (5.0, 5.0, 0.0)
    assert cfg.gamma_node == (5.0,) * 3 and cfg.gamma_edge == (5.0,) * 4
    assert cfg.w_hat0_node == (0.0,) * 3
