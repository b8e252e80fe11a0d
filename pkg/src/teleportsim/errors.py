"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid sweep or command-line configuration."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to produce a usable result."""


class ConvergenceError(NumericalError):
    """Iterative optimization hit its cap before converging.

    The best iterate found so far is attached as ``best`` so callers can
    inspect or reuse it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ThresholdNotFoundError(NumericalError):
    """A bracketing root search found no sign change on its interval."""
