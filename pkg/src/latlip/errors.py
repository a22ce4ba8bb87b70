class LatlipError(Exception):
    """Base class for library errors."""


class ConfigError(LatlipError, ValueError):
    """Invalid run configuration or operator specification."""


class NumericalError(LatlipError, ArithmeticError):
    """A computation left its numerically valid regime."""


class DegenerateCloudError(NumericalError):
    """A point cloud does not span the space (rank-deficient covariance)."""


class UnboundedConstantError(NumericalError):
    """A per-coordinate Lipschitz constant is infinite on the given samples."""

    def __init__(self, coordinate: int, message: str = ""):
        self.coordinate = coordinate
        super().__init__(message or f"K({coordinate + 1}) is unbounded on the sample set")


class UncertifiedModelError(NumericalError):
    """The given constants violate the weakened lattice Lipschitz inequality on the samples."""
