"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid scenario or parameter value. ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateGeometryError(DomainError):
    """Target lies in the camera plane, or nodes coincide."""


class BlockedLinkError(RuntimeError):
    """No reflected light reaches a camera."""


class EstimationError(RuntimeError):
    """Every Monte Carlo trial failed, so no estimate exists."""


class InvalidRegimeError(ValueError):
    """Closed-form approximation evaluated outside its validity regime."""


class QuadratureError(RuntimeError):
    """Quadrature order out of range or non-finite integrand."""
