"""Unknown interaction coefficients as deterministic time signals.

Each coefficient is a :class:`CoefficientSignal` with closed-form bounds on
its value and its time derivative. For the kernels, signals are packed into
float rows ``[kind, base, amplitude, omega, phase, rate, saturation]``.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._accel import njit
from .errors import UnknownEdgeError, UnknownNodeError

CONSTANT = "constant"
SINUSOID = "sinusoid"
RAMP = "ramp-saturated"
KINDS = (CONSTANT, SINUSOID, RAMP)
KIND_CODE = {CONSTANT: 0, SINUSOID: 1, RAMP: 2}
ROW_WIDTH = 7


@dataclass(frozen=True)
class CoefficientSignal:
    """Bounded scalar signal.

    * constant: ``base``
    * sinusoid: ``base + amplitude * sin(omega * t + phase)``; the default
      phase of pi/2 makes this ``base + amplitude * cos(omega * t)``
    * ramp-saturated: ``base + clip(rate * t, -saturation, saturation)``
    """

    kind: str = CONSTANT
    base: float = 0.0
    amplitude: float = 0.0
    omega: float = 0.0
    phase: float = math.pi / 2
    rate: float = 0.0
    saturation: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}; expected one of {KINDS}")
        vals = (self.base, self.amplitude, self.omega, self.phase, self.rate, self.saturation)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("signal parameters must be finite")
        if self.kind == SINUSOID and self.omega < 0:
            raise ValueError("omega must be nonnegative")
        if self.kind == RAMP and self.saturation < 0:
            raise ValueError("saturation must be nonnegative")

    @classmethod
    def constant(cls, value):
        return cls(CONSTANT, float(value))

    @classmethod
    def sinusoid(cls, base, amplitude, omega, phase=math.pi / 2):
        return cls(SINUSOID, float(base), float(amplitude), float(omega), float(phase))

    @classmethod
    def ramp(cls, base, rate, saturation):
        return cls(RAMP, float(base), rate=float(rate), saturation=float(saturation))

    @property
    def is_constant(self):
        return self.derivative_bound == 0.0

    @property
    def value_bound(self):
        if self.kind == SINUSOID:
            return abs(self.base) + abs(self.amplitude)
        if self.kind == RAMP:
            return abs(self.base) + self.saturation
        return abs(self.base)

    @property
    def derivative_bound(self):
        if self.kind == SINUSOID:
            return abs(self.amplitude) * self.omega
        if self.kind == RAMP and self.saturation > 0:
            return abs(self.rate)
        return 0.0

    def row(self):
        return np.array(
            [KIND_CODE[self.kind], self.base, self.amplitude, self.omega,
             self.phase, self.rate, self.saturation],
            dtype=float,
        )

    def __call__(self, t):
        return signal_value_any(self.row(), t)

    def scaled_derivative(self, factor):
        """Same signal with its rate of change scaled by ``factor``."""
        if self.kind == SINUSOID:
            return replace(self, omega=self.omega * factor)
        if self.kind == RAMP:
            return replace(self, rate=self.rate * factor)
        return self


def signal_value_any(row, t):
    """Evaluate a packed signal row at scalar or array ``t``."""
    kind = int(row[0])
    if kind == 1:
        return row[1] + row[2] * np.sin(row[3] * t + row[4])
    if kind == 2:
        return row[1] + np.clip(row[5] * t, -row[6], row[6])
    return row[1] + 0.0 * t


@njit(cache=True)
def signal_value(row, t):
    kind = int(row[0])
    if kind == 1:
        return row[1] + row[2] * math.sin(row[3] * t + row[4])
    if kind == 2:
        v = row[5] * t
        if v > row[6]:
            v = row[6]
        elif v < -row[6]:
            v = -row[6]
        return row[1] + v
    return row[1]


@njit(cache=True)
def eval_rows_into(rows, t, out):
    for s in range(rows.shape[0]):
        out[s] = signal_value(rows[s], t)


def eval_rows(rows, t):
    """Values of every packed signal at scalar ``t`` (numpy path)."""
    kinds = rows[:, 0]
    out = rows[:, 1].copy()
    sin = kinds == 1
    if sin.any():
        r = rows[sin]
        out[sin] += r[:, 2] * np.sin(r[:, 3] * t + r[:, 4])
    ramp = kinds == 2
    if ramp.any():
        r = rows[ramp]
        out[ramp] += np.clip(r[:, 5] * t, -r[:, 6], r[:, 6])
    return out


def eval_rows_grid(rows, times):
    """Signal values on a time grid, shape ``(len(times), len(rows))``."""
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, rows.shape[0]))
    for s in range(rows.shape[0]):
        out[:, s] = signal_value_any(rows[s], times)
    return out


@dataclass(frozen=True)
class UncertainCoefficients:
    """Node self-coefficients and per-direction edge coefficients.

    ``alpha`` maps node id to signal; ``beta`` maps each directed edge
    ``(i, j)`` of ``graph`` to a signal, independently of ``(j, i)``.
    """

    graph: object
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = self.graph
        if set(self.alpha) != set(range(1, g.n + 1)):
            raise UnknownNodeError(f"alpha must be given for exactly nodes 1..{g.n}")
        if set(self.beta) != set(g.directed_edges):
            missing = sorted(set(g.directed_edges) - set(self.beta))
            extra = sorted(set(self.beta) - set(g.directed_edges))
            raise UnknownEdgeError(f"beta must cover the directed edges; missing={missing}, not edges={extra}")

    @classmethod
    def constant(cls, graph, alpha, beta):
        """``alpha`` as a sequence in node order; ``beta`` as {(i, j): value}."""
        a = {i + 1: CoefficientSignal.constant(v) for i, v in enumerate(alpha)}
        b = {tuple(e): CoefficientSignal.constant(v) for e, v in beta.items()}
        return cls(graph, a, b)

    @classmethod
    def nominal(cls, graph):
        """Coefficients for which the plant equals the reference model."""
        return cls.constant(graph, graph.degree.astype(float), {e: 1.0 for e in graph.directed_edges})

    def alpha_rows(self):
        return np.array([self.alpha[i].row() for i in range(1, self.graph.n + 1)]).reshape(-1, ROW_WIDTH)

    def beta_rows(self):
        return np.array([self.beta[e].row() for e in self.graph.directed_edges]).reshape(-1, ROW_WIDTH)

    def signals(self):
        yield from self.alpha.values()
        yield from self.beta.values()

    @property
    def is_constant(self):
        return all(s.is_constant for s in self.signals())

    def with_alpha(self, i, signal):
        return replace(self, alpha={**self.alpha, i: signal})

    def with_beta(self, i, j, signal):
        return replace(self, beta={**self.beta, (i, j): signal})

    def scaled_derivatives(self, factor):
        return replace(
            self,
            alpha={i: s.scaled_derivative(factor) for i, s in self.alpha.items()},
            beta={e: s.scaled_derivative(factor) for e, s in self.beta.items()},
        )


def eval_alpha(u, i, t):
    if i not in u.alpha:
        raise UnknownNodeError(f"node {i} is not in 1..{u.graph.n}")
    return float(u.alpha[i](t))


def eval_beta(u, i, j, t):
    if (i, j) not in u.beta:
        raise UnknownEdgeError(f"({i}, {j}) is not an edge")
    return float(u.beta[(i, j)](t))


def derivative_bound(u):
    """Largest derivative bound over every coefficient; 0 iff all constant."""
    return max((s.derivative_bound for s in u.signals()), default=0.0)
