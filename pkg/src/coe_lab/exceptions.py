"""Exception hierarchy shared by every module.

Errors split into two families: input problems (a malformed model, a bad
query) and estimand problems (the data are fine but the quantity asked for
is undefined, unidentified or infeasible). The command line maps the first
family to exit code 2 and the second to exit code 3.
"""


class CoeLabError(Exception):
    """Base class for all package errors."""


class ModelError(CoeLabError, ValueError):
    """A model, query or data file violates a structural invariant."""


class CycleDetected(ModelError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("graph contains a cycle: " + " -> ".join(map(str, self.cycle)))


class EstimandError(CoeLabError):
    """The requested quantity cannot be computed from the given inputs."""


class ZeroMass(EstimandError, ZeroDivisionError):
    """Conditioning on an event of probability zero."""


class PositivityViolation(EstimandError):
    """An adjustment stratum never receives the exposure level required."""


class InfeasibleData(EstimandError):
    """The supplied probabilities admit no joint distribution."""


class WeakInstrument(EstimandError):
    """The instrument has (numerically) no effect on the exposure."""


class UndefinedEstimand(EstimandError):
    """The estimand conditions on a null event, e.g. PC when P(Y=1|X=1)=0."""
