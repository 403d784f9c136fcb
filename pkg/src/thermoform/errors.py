"""Exception types shared across the package."""


class NotMixingError(RuntimeError):
    """The operation needs a topologically mixing shift.

    Raised by the spectral solver on reducible or periodic transition
    structures; use decompose_components to handle those.
    """


class ConvergenceError(RuntimeError):
    """An iteration failed to reach the requested residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class IndeterminateError(RuntimeError):
    """A certified enclosure is too wide to decide the question asked.

    Callers can retry with a smaller sum tolerance or more terms.
    """


class EnvelopeError(ValueError):
    """A tail envelope failed validation against the realized values."""
