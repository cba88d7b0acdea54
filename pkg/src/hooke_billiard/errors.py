"""Exception types raised across the package."""


class BilliardError(ValueError):
    """Base class for all billiard errors."""


class ConicError(BilliardError):
    """Invalid or degenerate confocal parameter."""


class DomainError(BilliardError):
    """A phase state outside the reflecting billiard domain."""


class SingularMapError(BilliardError):
    """The closed-form bounce map is singular at the given state."""


class EmptyLevelError(BilliardError):
    """A requested level set or isoenergy manifold is empty."""
