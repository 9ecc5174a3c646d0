import json
import os
import subprocess
import sys

import numpy as np
import pytest

from adaptive_consensus import kernels
from adaptive_consensus.controller import ControllerConfig
from adaptive_consensus.graph import random_connected_graph
from adaptive_consensus.scenario import Scenario, line3_scenario
from adaptive_consensus.sim import SimConfig, pack_params, run
from adaptive_consensus.uncertainty import CoefficientSignal, UncertainCoefficients


def random_scenario(rng, controlled=True, weighted=False):
    g = random_connected_graph(int(rng.integers(2, 9)), rng)

    def sig():
        u = rng.random()
        if u < 0.4:
            return CoefficientSignal.constant(rng.uniform(-2, 2))
        if u < 0.8:
            return CoefficientSignal.sinusoid(rng.uniform(-2, 2), rng.uniform(0, 1), rng.uniform(0, 3),
                                              rng.uniform(0, 6))
        return CoefficientSignal.ramp(rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(0.1, 2))

    coeffs = UncertainCoefficients(g, {i: sig() for i in range(1, g.n + 1)},
                                   {e: sig() for e in g.directed_edges})
    ctrl = ControllerConfig.build(g, k=rng.uniform(0.1, 5, g.n), gamma_node=rng.uniform(0.5, 5, g.n),
                                  gamma_edge=rng.uniform(0.5, 5, len(g.directed_edges)),
                                  theta_max=rng.uniform(1, 10), epsilon=rng.uniform(0.05, 0.9)) if controlled else None
    xi = {e: rng.uniform(0.2, 3) for e in g.edges} if weighted else None
    return Scenario("random", g, coeffs, tuple(rng.normal(size=g.n)), ctrl, reference_weights=xi)


@pytest.mark.parametrize("kind", [kernels.CLOSED_LOOP, kernels.ERROR_FORM])
def test_loop_and_numpy_vector_fields_agree(rng, kind):
    for trial in range(100):
        sc = random_scenario(rng, controlled=kind == kernels.ERROR_FORM or trial % 2 == 0, weighted=trial % 3 == 0)
        p = pack_params(sc)
        # probe near and beyond the projection boundary too
        dim = 3 * p.n + p.src.size
        y = rng.normal(size=dim) * np.r_[np.ones(2 * p.n), np.full(dim - 2 * p.n, 1.2 * p.theta_max)]
        t = rng.uniform(0, 30)
        a, b = np.empty(dim), np.empty(dim)
        kernels.rhs_loops(kind, t, y, p, a)
        kernels.rhs_numpy(kind, t, y, p, b)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_step_once_matches_integrate():
    sc = line3_scenario("b", controlled=True)
    p = pack_params(sc)
    y0 = np.r_[sc.x0, sc.x0, np.zeros(3), np.zeros(4)]
    rows, filled, status, _ = kernels.integrate(kernels.CLOSED_LOOP, kernels.RK4, y0, 0.0, 1e-3, 1, 1, p)
    assert filled == 2 and status == kernels.OK
    np.testing.assert_array_equal(rows[1, 1:], kernels.step_once(kernels.CLOSED_LOOP, kernels.RK4, 0.0, 1e-3, y0, p))


_FALLBACK_SCRIPT = """
import json
from adaptive_consensus import backend_name
from adaptive_consensus.scenario import line3_scenario
from adaptive_consensus.sim import SimConfig, run
sc = line3_scenario("b", controlled=True, sim=SimConfig(h=1e-3, T=2.0, stride=100))
traj = run(sc)
print(json.dumps({"backend": backend_name(), "x": traj.x.tolist(), "w": traj.w_hat_edge.tolist()}))
"""


@pytest.mark.slow
def test_numpy_fallback_matches_numba():
    env = dict(os.environ, ADAPTIVE_CONSENSUS_NO_JIT="1")
    out = subprocess.run([sys.executable, "-c", _FALLBACK_SCRIPT], env=env, capture_output=True, text=True,
                         check=True, timeout=600)
    res = json.loads(out.stdout)
    assert res["backend"] == "numpy"
    traj = run(line3_scenario("b", controlled=True, sim=SimConfig(h=1e-3, T=2.0, stride=100)))
    np.testing.assert_allclose(res["x"], traj.x, rtol=0, atol=1e-12)
    np.testing.assert_allclose(res["w"], traj.w_hat_edge, rtol=0, atol=1e-12)
