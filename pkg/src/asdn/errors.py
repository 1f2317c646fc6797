"""Exception hierarchy shared by every module of the package."""


class ASDNError(Exception):
    """Base class for all errors raised by :mod:`asdn`."""


class DomainError(ASDNError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NonFinite(ASDNError, ArithmeticError):
    """An expectation or moment diverged numerically."""


class NoConvergence(ASDNError, RuntimeError):
    """An iterative or adaptive routine ran out of budget above tolerance."""


class NotADensity(ASDNError, ValueError):
    """A function handed in as a pdf does not integrate to one."""


class EmptyTail(ASDNError, ValueError):
    """A conditioning event on the noise has probability zero."""


class NonMonotoneSigma(ASDNError, ValueError):
    """The operation needs a monotone noise profile."""


class UnsupportedConstraintCombination(ASDNError, ValueError):
    """No closed-form maximum-entropy solution is implemented for the constraint set."""


class NotIncreasing(ASDNError, ValueError):
    pass


class NotConvex(ASDNError, ValueError):
    pass


class HypothesisFailed(ASDNError, ValueError):
    """A sampled hypothesis check of a closed-form bound failed."""

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = list(failed)


class UnboundedSupport(ASDNError, ValueError):
    """The discretized oracle needs a bounded input support."""


class StepFailed(ASDNError, RuntimeError):
    """Packing recurrence could not bracket the next point."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index
