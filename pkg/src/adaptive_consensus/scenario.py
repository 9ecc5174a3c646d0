"""Scenario files: schema, validation, and the bundled line-graph cases.

A scenario is a JSON document::

    {
      "name": "fig2b",
      "graph": {"n": 3, "edges": [[1, 2], [2, 3]]},
      "coefficients": {
        "alpha": [1.0, 1.1, 1.0],
        "beta": {"1-2": 1.0, "2-1": 0.1, "2-3": 1.0, "3-2": 1.0}
      },
      "x0": [0.2, 0.4, 1.2],
      "controller": {"k": [5.0, 5.0, 0.0], "gamma_node": 5.0, "gamma_edge": 5.0,
                     "theta_max": 10.0, "epsilon": 0.1},
      "sim": {"h": 0.001, "T": 15.0, "integrator": "rk4", "stride": 10}
    }

Edges use 1-based ids; directed edges are written ``"i-j"``. A coefficient
is either a number (constant) or a signal object such as
``{"kind": "sinusoid", "base": 2.0, "amplitude": 0.5, "omega": 1.0, "phase": 0.0}``.
``controller`` is ``null`` for an uncontrolled run. Optional keys: ``r0``
(defaults to ``x0``), ``reference_weights`` (``{"i-j": weight}``, symmetric),
and per-agent/per-edge forms of ``gamma_node``, ``gamma_edge``,
``w_hat0_node`` and ``w_hat0_edge`` (lists or ``"i-j"`` maps).
"""
import json
import math
import re
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path

from .controller import ControllerConfig
from .errors import GraphError, ScenarioError
from .graph import build_graph, is_connected
from .plant import reference_weights as _reference_weight_array
from .sim import SimConfig
from .uncertainty import CONSTANT, CoefficientSignal, UncertainCoefficients

BUNDLED = ("fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c", "fig2d")

# Line graph on three agents with x0 = (0.2, 0.4, 1.2).
LINE3_CASES = {
    "a": ((1.0, 2.0, 1.0), (1.0, 1.0, 1.0, 1.0)),
    "b": ((1.0, 1.1, 1.0), (1.0, 0.1, 1.0, 1.0)),
    "c": ((1.0, 2.0, 1.0), (-1.0, -1.0, 1.0, 1.0)),
    "d": ((1.0, 1.5, 1.0), (1.0, 1.0, 1.0, 1.0)),
}
LINE3_X0 = (0.2, 0.4, 1.2)


_SCALAR_LIST = re.compile(r"\[\s+([^\[\]{}]*?)\s+\]")


class ScenarioParseError(ScenarioError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    graph: object
    coefficients: UncertainCoefficients
    x0: tuple
    controller: ControllerConfig = None
    sim: SimConfig = SimConfig()
    reference_weights: dict = None
    r0: tuple = None

    def validate(self):
        g = self.graph
        if not is_connected(g):
            raise ScenarioError("graph must be connected", "graph")
        for name in ("x0", "r0"):
            v = getattr(self, name)
            if v is None:
                continue
            if len(v) != g.n:
                raise ScenarioError(f"expected {g.n} entries, got {len(v)}", name)
            if not all(math.isfinite(a) for a in v):
                raise ScenarioError("entries must be finite", name)
        if self.controller is not None:
            self.controller.validate(g)
        self.sim.validate()
        _reference_weight_array(g, self.reference_weights)
        return self

    def with_sim(self, **changes):
        return replace(self, sim=replace(self.sim, **changes))

    def with_controller(self, **changes):
        return replace(self, controller=replace(self.controller, **changes))


def line3_scenario(case, controlled, sim=None):
    """One of the four constant-coefficient line-graph cases, with or without the adaptive controller."""
    alpha, beta = LINE3_CASES[case]
    g = build_graph(3, [(1, 2), (2, 3)])
    coeffs = UncertainCoefficients.constant(g, alpha, dict(zip(((1, 2), (2, 1), (2, 3), (3, 2)), beta)))
    ctrl = ControllerConfig.build(g, k=(5.0, 5.0, 0.0), gamma_node=5.0, gamma_edge=5.0) if controlled else None
    name = f"fig{2 if controlled else 1}{case}"
    return Scenario(name, g, coeffs, LINE3_X0, ctrl, sim or SimConfig(h=1e-3, T=15.0, stride=10))


# --- serialisation -----------------------------------------------------------

def _edge_key(e):
    return f"{e[0]}-{e[1]}"


def _parse_edge_key(key, field):
    try:
        i, j = (int(v) for v in str(key).split("-"))
    except ValueError:
        raise ScenarioError(f"edge key {key!r} is not of the form 'i-j'", field) from None
    return i, j


def _signal_to_json(s):
    if s.kind == CONSTANT:
        return s.base
    out = {"kind": s.kind}
    for f in fields(s):
        if f.name != "kind" and getattr(s, f.name) != f.default:
            out[f.name] = getattr(s, f.name)
    return out


def _signal_from_json(v, field):
    if isinstance(v, bool):
        raise ScenarioError("expected a number or signal object", field)
    if isinstance(v, (int, float)):
        return CoefficientSignal.constant(v)
    if not isinstance(v, dict):
        raise ScenarioError("expected a number or signal object", field)
    allowed = {f.name for f in fields(CoefficientSignal)}
    unknown = set(v) - allowed
    if unknown:
        raise ScenarioError(f"unknown signal keys {sorted(unknown)}", field)
    try:
        return CoefficientSignal(**{k: (val if k == "kind" else float(val)) for k, val in v.items()})
    except (TypeError, ValueError) as err:
        raise ScenarioError(str(err), field) from None


def _per_edge(v, g, field, default):
    """Scalar, list in directed-edge order, or ``{"i-j": value}`` map."""
    m = len(g.directed_edges)
    if v is None:
        return (default,) * m
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return (float(v),) * m
    if isinstance(v, list):
        if len(v) != m:
            raise ScenarioError(f"expected {m} entries, got {len(v)}", field)
        return tuple(float(a) for a in v)
    if isinstance(v, dict):
        got = {_parse_edge_key(k, field): float(a) for k, a in v.items()}
        bad = sorted(set(got) - set(g.directed_edges))
        if bad:
            raise ScenarioError(f"{bad} are not edges", field)
        return tuple(got.get(e, default) for e in g.directed_edges)
    raise ScenarioError("expected a number, list or edge map", field)


def _per_node(v, n, field, default):
    if v is None:
        return (default,) * n
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return (float(v),) * n
    if isinstance(v, list):
        if len(v) != n:
            raise ScenarioError(f"expected {n} entries, got {len(v)}", field)
        return tuple(float(a) for a in v)
    raise ScenarioError("expected a number or list", field)


def _require(d, key, field):
    if key not in d:
        raise ScenarioError("missing required key", f"{field}.{key}" if field else key)
    return d[key]


def scenario_from_dict(d):
    """Build and validate a :class:`Scenario` from parsed JSON."""
    if not isinstance(d, dict):
        raise ScenarioError("scenario must be a JSON object")
    known = {"name", "graph", "coefficients", "x0", "r0", "controller", "sim", "reference_weights"}
    unknown = set(d) - known
    if unknown:
        raise ScenarioError(f"unknown keys {sorted(unknown)}")
    gd = _require(d, "graph", "")
    try:
        g = build_graph(_require(gd, "n", "graph"), _require(gd, "edges", "graph"))
    except GraphError as err:
        raise ScenarioError(str(err), "graph.edges") from None
    except (TypeError, ValueError) as err:
        raise ScenarioError(str(err), "graph") from None

    cd = _require(d, "coefficients", "")
    alpha_in = _require(cd, "alpha", "coefficients")
    if not isinstance(alpha_in, list) or len(alpha_in) != g.n:
        raise ScenarioError(f"expected a list of {g.n} coefficients", "coefficients.alpha")
    alpha = {i + 1: _signal_from_json(v, f"coefficients.alpha[{i + 1}]") for i, v in enumerate(alpha_in)}
    beta_in = _require(cd, "beta", "coefficients")
    if not isinstance(beta_in, dict):
        raise ScenarioError("expected an 'i-j' keyed object", "coefficients.beta")
    beta = {}
    for key, v in beta_in.items():
        e = _parse_edge_key(key, "coefficients.beta")
        if not g.has_edge(*e):
            raise ScenarioError(f"{key} is not an edge of the graph", "coefficients.beta")
        beta[e] = _signal_from_json(v, f"coefficients.beta[{key}]")
    missing = [_edge_key(e) for e in g.directed_edges if e not in beta]
    if missing:
        raise ScenarioError(f"missing directed edges {missing}", "coefficients.beta")
    coeffs = UncertainCoefficients(g, alpha, beta)

    x0 = _per_node(_require(d, "x0", ""), g.n, "x0", 0.0)
    r0 = d.get("r0")
    r0 = None if r0 is None else _per_node(r0, g.n, "r0", 0.0)

    ctrl = None
    c = d.get("controller")
    if c is not None:
        if not isinstance(c, dict):
            raise ScenarioError("expected an object or null", "controller")
        ck = {"k", "gamma_node", "gamma_edge", "theta_max", "epsilon", "w_hat0_node", "w_hat0_edge"}
        if set(c) - ck:
            raise ScenarioError(f"unknown keys {sorted(set(c) - ck)}", "controller")
        ctrl = ControllerConfig(
            k=_per_node(_require(c, "k", "controller"), g.n, "controller.k", 0.0),
            gamma_node=_per_node(c.get("gamma_node", 5.0), g.n, "controller.gamma_node", 5.0),
            gamma_edge=_per_edge(c.get("gamma_edge", 5.0), g, "controller.gamma_edge", 5.0),
            theta_max=float(c.get("theta_max", 10.0)),
            epsilon=float(c.get("epsilon", 0.1)),
            w_hat0_node=_per_node(c.get("w_hat0_node"), g.n, "controller.w_hat0_node", 0.0),
            w_hat0_edge=_per_edge(c.get("w_hat0_edge"), g, "controller.w_hat0_edge", 0.0),
        )

    sd = d.get("sim", {})
    if not isinstance(sd, dict) or set(sd) - {"h", "T", "integrator", "stride"}:
        raise ScenarioError("expected an object with keys h, T, integrator, stride", "sim")
    try:
        sim = SimConfig(h=float(sd.get("h", 1e-3)), T=float(sd.get("T", 15.0)),
                        integrator=str(sd.get("integrator", "rk4")), stride=int(sd.get("stride", 1)))
    except (TypeError, ValueError) as err:
        raise ScenarioError(str(err), "sim") from None

    xi = d.get("reference_weights")
    if xi is not None:
        if not isinstance(xi, dict):
            raise ScenarioError("expected an 'i-j' keyed object", "reference_weights")
        xi = {_parse_edge_key(k, "reference_weights"): float(v) for k, v in xi.items()}
        _reference_weight_array(g, xi)
        xi = {(min(e), max(e)): v for e, v in sorted(xi.items())}
    sc = Scenario(str(d.get("name", "scenario")), g, coeffs, x0, ctrl, sim, xi, r0)
    return sc.validate()


def scenario_to_dict(sc):
    g = sc.graph
    d = {
        "name": sc.name,
        "graph": {"n": g.n, "edges": [list(e) for e in g.edges]},
        "coefficients": {
            "alpha": [_signal_to_json(sc.coefficients.alpha[i]) for i in range(1, g.n + 1)],
            "beta": {_edge_key(e): _signal_to_json(sc.coefficients.beta[e]) for e in g.directed_edges},
        },
        "x0": list(sc.x0),
    }
    if sc.r0 is not None:
        d["r0"] = list(sc.r0)
    if sc.reference_weights is not None:
        d["reference_weights"] = {_edge_key(e): v for e, v in sc.reference_weights.items()}
    c = sc.controller
    if c is None:
        d["controller"] = None
    else:
        d["controller"] = {
            "k": list(c.k),
            "gamma_node": list(c.gamma_node),
            "gamma_edge": {_edge_key(e): v for e, v in zip(g.directed_edges, c.gamma_edge)},
            "theta_max": c.theta_max,
            "epsilon": c.epsilon,
            "w_hat0_node": list(c.w_hat0_node),
            "w_hat0_edge": {_edge_key(e): v for e, v in zip(g.directed_edges, c.w_hat0_edge)},
        }
    d["sim"] = {"h": sc.sim.h, "T": sc.sim.T, "integrator": sc.sim.integrator, "stride": sc.sim.stride}
    return d


def _inline_scalar_lists(match):
    return "[" + ", ".join(part.strip() for part in match.group(1).split(",")) + "]"


def dumps(sc):
    text = json.dumps(scenario_to_dict(sc), indent=2)
    return _SCALAR_LIST.sub(_inline_scalar_lists, text) + "\n"


def save_scenario(sc, path):
    Path(path).write_text(dumps(sc))


def loads(text):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioParseError(f"invalid JSON: {err}") from None
    return scenario_from_dict(d)


def bundled_text(name):
    if name not in BUNDLED:
        raise KeyError(name)
    return resources.files("adaptive_consensus.scenarios").joinpath(f"{name}.json").read_text()


def load_scenario(path_or_name):
    """Load a scenario file, or a bundled scenario by name (``fig1a`` ... ``fig2d``).

    Raises :class:`FileNotFoundError` for a missing file and
    :class:`ScenarioError` for parse or validation failures.
    """
    p = Path(path_or_name)
    if p.is_file():
        return loads(p.read_text())
    if str(path_or_name) in BUNDLED:
        return loads(bundled_text(str(path_or_name)))
    raise FileNotFoundError(f"no scenario file or bundled scenario named {path_or_name!r}")
