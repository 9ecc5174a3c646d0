"""Exception hierarchy shared across modules."""


class AdaptiveConsensusError(Exception):
    pass


class GraphError(AdaptiveConsensusError, ValueError):
    """Invalid graph construction input."""


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class NodeRangeError(GraphError):
    pass


class PreconditionError(AdaptiveConsensusError, ValueError):
    """Hypotheses of the positive-definiteness certificate are violated."""


class DimensionError(AdaptiveConsensusError, ValueError):
    pass


class UnknownNodeError(AdaptiveConsensusError, KeyError):
    pass


class UnknownEdgeError(AdaptiveConsensusError, KeyError):
    pass


class ProjectionConfigError(AdaptiveConsensusError, ValueError):
    pass


class ScenarioError(AdaptiveConsensusError, ValueError):
    """Scenario failed to parse or validate.

    ``field`` names the offending entry (dotted path) when one applies.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class DivergenceError(AdaptiveConsensusError, RuntimeError):
    """Integration produced a non-finite or runaway state.

    ``partial`` holds the trajectory recorded up to the failure, if any.
    """

    def __init__(self, t, partial=None):
        self.t = t
        self.partial = partial
        super().__init__(f"state diverged at t={t:.6g}")
