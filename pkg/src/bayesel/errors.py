"""Exception types raised across the package."""


class BayesELError(Exception):
    """Base class for all package errors."""


class DimensionError(BayesELError, ValueError):
    """Array shapes are inconsistent or degenerate (e.g. m >= n)."""


class NonFiniteError(BayesELError, ValueError):
    """An input or an estimating-function value is NaN or infinite."""


class RootNotFound(BayesELError, RuntimeError):
    """The root solver for the conditional estimating equation gave up."""


class InitInfeasible(BayesELError, ValueError):
    """The initial chain state has zero posterior density."""


class EmptyTrace(BayesELError, ValueError):
    """No samples remain after burn-in."""


class TooShort(BayesELError, ValueError):
    """A series is too short for the requested diagnostic."""


class SamplerAborted(BayesELError, RuntimeError):
    """A chain hit a numerical error; ``trace`` holds the steps completed so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
