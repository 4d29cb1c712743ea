from typing import List, Optional


class IGPDelayError(Exception):
    """Base exception class for all igp_delay errors."""
    pass

class InvalidParameterError(IGPDelayError):
    """Raised when model parameters violate their invariants."""
    pass

class InvalidInputError(IGPDelayError):
    """Raised when an operation receives non-finite or malformed input."""
    pass

class UndefinedEquilibriumError(IGPDelayError):
    """Raised when the positive equilibrium is requested while S = 0."""
    pass

class NotApplicableError(IGPDelayError):
    """Raised when the hypotheses of a stability result do not hold.

    Carries the evaluated hypotheses so callers can report which one failed.
    """

    def __init__(self, message: str, hypotheses: Optional[List] = None, failing: Optional[str] = None):
        super().__init__(message)
        self.hypotheses = list(hypotheses or [])
        self.failing = failing

class InvalidCrossingError(IGPDelayError):
    """Raised when (i*omega, tau) is not a root of the characteristic function."""
    pass

class NoCrossingError(IGPDelayError):
    """Raised when no imaginary-axis crossing is bracketed."""
    pass

class InvalidStepError(IGPDelayError):
    """Raised when the step size does not divide the delay."""
    pass

class DivergenceError(IGPDelayError):
    """Raised when a simulated state blows up."""
    pass

class OutputError(IGPDelayError):
    """Raised when there's an error with output operations."""
    pass
