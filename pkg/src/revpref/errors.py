"""Exception types shared across the package.

Every error raised by the public API derives from :class:`RevprefError`,
so callers can catch one base class at tool boundaries.
"""

from __future__ import annotations


class RevprefError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(RevprefError):
    """Vectors that must share a length do not."""


class NonPositivePrice(RevprefError):
    """A price (or a per-point return, which implies a price) is not > 0."""


class ZeroExpenditure(RevprefError):
    """An observation whose bundle costs nothing at its own prices."""


class BudgetMismatch(RevprefError):
    """A point allocation does not sum to the round budget."""


class NegativeAllocation(RevprefError):
    """A point allocation contains a negative entry."""


class ParseError(RevprefError):
    """A machine-readable input file is malformed.

    Carries enough position information to locate the offending record.
    """

    def __init__(self, message: str, *, source: str | None = None,
                 field: str | None = None) -> None:
        detail = message
        if source is not None:
            detail = f"{source}: {detail}"
        if field is not None:
            detail = f"{detail} (field {field!r})"
        super().__init__(detail)
        self.source = source
        self.field = field


class SchemaVersionMismatch(RevprefError):
    """An input file declares a schema this build does not understand."""


class EfficiencyOutOfRange(RevprefError):
    """An efficiency level outside [0, 1]."""


class UnknownDomain(RevprefError):
    """A task domain name with no registered templates."""


class InvalidParameter(RevprefError):
    """A numeric parameter outside its documented range."""


class InsufficientData(RevprefError):
    """A statistic that needs more observations than were supplied."""


class MissingInput(RevprefError):
    """A pipeline stage whose input files are absent."""


class EndpointError(RevprefError):
    """A remote completion endpoint failed permanently."""


class TransientEndpointError(EndpointError):
    """A retryable endpoint failure (rate limit, 5xx, connection reset).

    ``retry_after`` is the server-suggested wait in seconds when the
    response carried one, else None.
    """

    def __init__(self, message: str, *, retry_after: float | None = None) -> None:
        super().__init__(message)
        self.retry_after = retry_after
