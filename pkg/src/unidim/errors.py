"""Exception hierarchy shared by every module."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class WindowTooSmallError(DomainError):
    """A query needs data beyond the generated window."""


class InvalidRuleError(DomainError):
    """A covering rule failed its audit or violates its declared floor."""


class CapExceededError(DomainError):
    """A biasing weight exceeded the declared rejection cap."""
