"""Exception types shared across modules."""


class GCVerifyError(Exception):
    """Base class for library errors."""


class DomainError(GCVerifyError, ValueError):
    """A point lies outside the domain of a chart or map."""


class InconclusiveError(GCVerifyError):
    """Sampling could not produce enough admissible points."""


class PreconditionError(GCVerifyError, ValueError):
    """An input failed a sampled precondition; carries the offending residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class SceneError(GCVerifyError, ValueError):
    """A scene document is malformed or references an unknown name."""
