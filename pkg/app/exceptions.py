class DensityMatchError(Exception):
    """Base exception for all density-matching errors"""


class DomainError(DensityMatchError):
    """Raised when a function is evaluated outside the domain where it is defined."""


class GridError(DensityMatchError):
    """Raised for invalid quadrature grids or vectors living on different grids."""


class DegenerateSurrogateError(DensityMatchError):
    """Raised when the two-state surrogate is flat and its inverse does not exist."""


class BandwidthError(DensityMatchError):
    """Raised when a kernel bandwidth cannot be resolved from the samples."""


class ModelError(DensityMatchError):
    """Raised when an uncertain model cannot be built or evaluated."""


class ConfigError(DensityMatchError):
    """Raised when a run configuration is invalid."""

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.message = message
        self.errors = errors or []


class OptimizationError(DensityMatchError):
    """Raised when the objective fails mid-run; keeps the trace recorded so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.message = message
        self.trace = trace


class VerificationError(DensityMatchError):
    """Raised when a verification check cannot be carried out."""
