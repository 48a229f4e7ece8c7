"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`MixQNNError` so the CLI
can map it onto a stable exit code. Transport failures are kept apart from
domain errors because they get their own exit code.
"""


class MixQNNError(Exception):
    """Base class for all toolkit errors."""


class DomainError(MixQNNError, ValueError):
    """Invalid argument for a mathematical operation."""


class EncodingError(DomainError):
    pass


class DimensionError(DomainError):
    pass


class WeightError(DomainError):
    pass


class StateError(DomainError):
    """A matrix that should be a density matrix is not one."""


class ParamError(DomainError):
    pass


class EmptyDatasetError(DomainError):
    pass


class EvalError(DomainError):
    pass


class BatchingError(DomainError):
    pass


class AuditError(DomainError):
    pass


class CorrelationError(DomainError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class OracleTooLargeError(DomainError):
    pass


class GenerationError(DomainError):
    pass


class OptimizationError(MixQNNError):
    """The objective returned a non-finite value."""

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


# --- wire format -----------------------------------------------------------


class FrameError(MixQNNError):
    """Base class for malformed or rejected frames."""


class FramingError(FrameError):
    """Truncated or wrongly sized frame."""


class BadMagic(FrameError):
    pass


class UnsupportedVersion(FrameError):
    pass


class ChecksumMismatch(FrameError):
    pass


class StateInvariantViolation(FrameError):
    pass


class ProtocolError(MixQNNError):
    """Peer violated the message grammar or handshake."""


class TransportError(MixQNNError):
    """Network failure after retries were exhausted."""
