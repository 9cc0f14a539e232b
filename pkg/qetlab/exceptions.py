"""
Exception hierarchy for the qetlab package.
"""


class QETError(Exception):
    """Base class for every error raised by qetlab."""


class DimensionError(QETError):
    """Operator shape is not square or its dimension is outside {2, 4, 8}."""


class InvalidOperatorError(QETError):
    """Operator fails a unitary, Hermitian or density-matrix check."""


class UnknownQubitError(QETError):
    """Qubit label is not part of the declared system."""


class DegenerateOperatorError(QETError):
    """Operator has no unique ground state."""


class OrderingResolutionError(QETError):
    """No basis ordering reproduces the printed gate structure."""


class ChannelError(QETError):
    """Kraus operators do not form a trace-preserving channel."""


class InvariantViolation(QETError):
    """A named invariant failed during a sweep or verification run."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        message = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(message)
