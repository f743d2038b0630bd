"""Exception types shared across the package."""


class AbddError(Exception):
    """Base class for all errors raised by this package."""


class PureNode(AbddError):
    """A node's sample slice holds only one label, so no balanced distribution exists."""


class WeakLearnerFailure(AbddError):
    """No hypothesis achieved positive edge (or the split made no progress)."""


class Diverged(AbddError):
    """Boosting hit its iteration cap; the partial diagram and trace are attached."""

    def __init__(self, message, diagram=None, trace=None):
        super().__init__(message)
        self.diagram = diagram
        self.trace = trace


class TrivialFunction(AbddError):
    """The function is constant on the cube."""


class StructuralError(AbddError):
    """Malformed diagram or circuit (cycle, dangling child, bad arity)."""


class DimensionCapError(AbddError):
    """Requested dimension exceeds the configured enumeration cap."""


class SolverTimeout(AbddError):
    """SAT query exceeded its time budget."""


class Indeterminate(SolverTimeout):
    """Robustness search aborted by a solver timeout at radius ``k``."""

    def __init__(self, message, k):
        super().__init__(message)
        self.k = k
