"""Exception hierarchy shared by every module."""


class TwistedEPError(Exception):
    """Base class for all library errors."""


class SchemaError(TwistedEPError):
    """Input data is structurally malformed."""


class DomainError(TwistedEPError):
    """An operation was called outside its domain (e.g. q_v for a sink)."""


class MembershipError(TwistedEPError):
    """An element is not in the ideal it was claimed to lie in."""


class UnsupportedTupleError(TwistedEPError):
    """The tuple violates a hypothesis required by the operation."""


class DivergenceError(TwistedEPError):
    """Rewriting exceeded the configured step cap."""


class ConstructionError(TwistedEPError):
    """Katsura data violates the vanishing conditions."""


class EncodingError(TwistedEPError):
    """A unit cannot be written in the supplied units model."""
