"""Shared exception hierarchy for the omni pipeline."""


class OmniError(Exception):
    """Base class for all pipeline errors."""


class InputError(OmniError):
    """Caller supplied malformed input (bad dimensions, empty buffer, ...)."""


class ConfigError(OmniError):
    """Configuration is internally inconsistent or incomplete."""


class ValidationError(OmniError):
    """A record or state object violates a structural invariant."""


class CapacityError(OmniError):
    """An item cannot fit into the available token budget."""


class PlanningError(OmniError):
    """No valid dialogue schedule exists for the requested spec."""


class GenerationError(OmniError):
    """Dialogue construction failed (exhausted repository, backend fault)."""


class BackendError(OmniError):
    """A model backend call failed after retries.

    ``body`` captures the raw response payload when one was received;
    ``unreachable`` marks pure transport failures where no response arrived
    at all (connection refused, DNS, exhausted timeouts).
    """

    def __init__(
        self,
        message: str,
        body: str | None = None,
        retryable: bool = False,
        unreachable: bool = False,
    ):
        super().__init__(message)
        self.body = body
        self.retryable = retryable
        self.unreachable = unreachable


class ProtocolError(OmniError):
    """A streaming peer violated the interleave contract."""


class VerdictParseError(OmniError):
    """Judge output did not contain a usable verdict object."""


class VerdictRangeError(VerdictParseError):
    """Judge verdict carried a score outside the 1-5 scale."""
