"""Exception types shared across the package."""


class FcmError(Exception):
    """Base class for all package errors."""


class ContractError(FcmError, ValueError):
    """A precondition or invariant was violated by the caller."""


class EnumerationBoundError(ContractError):
    """Refusal: the requested exhaustive enumeration exceeds the configured bound."""


class DecodeError(FcmError):
    """Text could not be decoded into a causal map (no recognizable nodes)."""


class RemoteServiceError(FcmError):
    """The text-generation service failed after the configured retries."""


class ReplayMissError(FcmError):
    """Replay-only mode was asked for a completion absent from the transcript cache."""


class SchemaError(FcmError):
    """A structured completion failed schema validation after the repair retry."""

    def __init__(self, message, stage=None, fields=None):
        super().__init__(message)
        self.stage = stage
        self.fields = tuple(fields or ())
