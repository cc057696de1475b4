"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigError(DomainError):
    """A configuration file could not be parsed."""


class ShapeError(ValueError):
    """Array dimensions are incompatible."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to converge.

    Carries diagnostic attributes: the interval that could not be
    resolved and the residual error estimate at the point of failure.
    """

    def __init__(self, message, interval=None, error_estimate=None):
        super().__init__(message)
        self.interval = interval
        self.error_estimate = error_estimate


class EstimationError(RuntimeError):
    """Blur estimation could not produce a usable result."""


class FitError(RuntimeError):
    """Regression fit failed (degenerate design or optimizer failure)."""


class ManifestError(ValueError):
    """A rating manifest violates its schema."""
