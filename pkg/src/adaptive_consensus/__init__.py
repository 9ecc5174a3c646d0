"""Distributed adaptive control of multiagent networks with uncertain interaction weights."""
from ._accel import USE_NUMBA, backend_name
from .analysis import consensus_report, lyapunov_value, perturbation_bound, ultimate_bound
from .controller import ControllerConfig, EstimatorState, control_input, estimator_rhs, proj
from .errors import DivergenceError, PreconditionError, ScenarioError
from .graph import GraphTopology, build_graph, is_connected, laplacian_spectrum, lemma1_certificate
from .scenario import Scenario, load_scenario, line3_scenario
from .sim import SimConfig, SimState, Trajectory, dual_run_consistency, run, step
from .uncertainty import CoefficientSignal, UncertainCoefficients

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA", "backend_name",
    "consensus_report", "lyapunov_value", "perturbation_bound", "ultimate_bound",
    "ControllerConfig", "EstimatorState", "control_input", "estimator_rhs", "proj",
    "DivergenceError", "PreconditionError", "ScenarioError",
    "GraphTopology", "build_graph", "is_connected", "laplacian_spectrum", "lemma1_certificate",
    "Scenario", "load_scenario", "line3_scenario",
    "SimConfig", "SimState", "Trajectory", "dual_run_consistency", "run", "step",
    "CoefficientSignal", "UncertainCoefficients",
]
