"""Exception hierarchy shared by all modules."""


class EnhFactorError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EnhFactorError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class UnsupportedCaseError(EnhFactorError, ValueError):
    """The requested symmetry class / parameter combination has no defined result."""


class ConvergenceError(EnhFactorError, RuntimeError):
    """An iterative numerical procedure failed to reach its tolerance.

    Carries the best available estimate so callers can inspect how far off
    the computation ended up.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None, evaluations=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate
        self.evaluations = evaluations


class NoCriticalPointError(EnhFactorError, RuntimeError):
    """No interior minimum of the enhancement curve was bracketed."""


class SolverError(EnhFactorError, RuntimeError):
    """A solver's structural assumption failed (singular system, broken monotonicity...)."""


class CalibrationError(EnhFactorError, RuntimeError):
    """An empirical fit did not describe the data well enough to be trusted."""
