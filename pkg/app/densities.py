"""Bounded input pdfs and target pdfs."""

from functools import cached_property
from typing import Annotated, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import betaincinv, betaln

from app.exceptions import DomainError, GridError
from app.quadrature import DensityVector, QuadratureGrid

ArrayLike = Union[float, np.ndarray]

_SQRT_2PI = np.sqrt(2.0 * np.pi)


class ScaledBeta(BaseModel):
    """Beta(alpha, beta_shape) distribution scaled and shifted onto [lower, upper].

    Shapes below 1 make the density unbounded at the endpoints and are rejected.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., description="First shape parameter (>= 1)")
    beta_shape: float = Field(..., description="Second shape parameter (>= 1)")
    lower: float = Field(..., description="Support lower bound")
    upper: float = Field(..., description="Support upper bound")

    @model_validator(mode="after")
    def check_parameters(self) -> "ScaledBeta":
        if self.alpha < 1 or self.beta_shape < 1:
            raise ValueError(
                f"beta shapes must be >= 1, got ({self.alpha}, {self.beta_shape})"
            )
        if self.upper <= self.lower:
            raise ValueError(
                f"upper ({self.upper}) must exceed lower ({self.lower})"
            )
        return self

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def support(self) -> Tuple[float, float]:
        return self.lower, self.upper

    @cached_property
    def _log_norm(self) -> float:
        return betaln(self.alpha, self.beta_shape) + np.log(self.width)

    @property
    def mode(self) -> float:
        if self.alpha == 1 and self.beta_shape == 1:
            return 0.5 * (self.lower + self.upper)
        return self.lower + self.width * (self.alpha - 1) / (
            self.alpha + self.beta_shape - 2
        )

    def pdf(self, u: ArrayLike) -> ArrayLike:
        """Density at u; zero outside [lower, upper]."""
        u = np.asarray(u, dtype=float)
        z = (u - self.lower) / self.width
        inside = (z >= 0) & (z <= 1)
        zc = np.clip(z, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_kernel = (self.alpha - 1) * np.log(zc) + (self.beta_shape - 1) * np.log1p(
                -zc
            )
            # 0 * log(0) -> nan for the uniform shapes at the endpoints
            log_kernel = np.where(np.isnan(log_kernel), 0.0, log_kernel)
            values = np.where(inside, np.exp(log_kernel - self._log_norm), 0.0)
        return values if values.ndim else float(values)

    def pdf_derivative(self, u: ArrayLike) -> ArrayLike:
        """d pdf / du by logarithmic differentiation; u must be strictly interior."""
        u = np.asarray(u, dtype=float)
        z = (u - self.lower) / self.width
        if np.any(z <= 0) or np.any(z >= 1):
            raise DomainError(
                f"pdf derivative requires u strictly inside ({self.lower}, {self.upper})"
            )
        log_slope = ((self.alpha - 1) / z - (self.beta_shape - 1) / (1 - z)) / self.width
        values = np.asarray(self.pdf(u)) * log_slope
        return values if values.ndim else float(values)

    def derivative_unbounded_at(self) -> Tuple[bool, bool]:
        """Whether p' diverges at the (lower, upper) endpoint."""
        return self.alpha < 2 and self.alpha != 1, (
            self.beta_shape < 2 and self.beta_shape != 1
        )

    def moments(self) -> Tuple[float, float]:
        """Analytic (mean, variance)."""
        total = self.alpha + self.beta_shape
        mean = self.lower + self.width * self.alpha / total
        variance = (
            self.width**2
            * self.alpha
            * self.beta_shape
            / (total**2 * (total + 1))
        )
        return mean, variance

    def sample(self, n: int, seed: int) -> np.ndarray:
        """n i.i.d. draws by inverting the regularized incomplete beta function."""
        if n < 1:
            raise ValueError(f"sample count must be >= 1, got {n}")
        rng = np.random.default_rng(seed)
        z = betaincinv(self.alpha, self.beta_shape, rng.random(n))
        return self.lower + self.width * z


class GaussianTarget(BaseModel):
    """Normal target pdf."""

    model_config = ConfigDict(frozen=True)

    family: Literal["gaussian"] = "gaussian"
    mean: float = Field(..., description="Target mean")
    std: float = Field(..., gt=0, description="Target standard deviation")

    def pdf(self, f: ArrayLike) -> ArrayLike:
        z = (np.asarray(f, dtype=float) - self.mean) / self.std
        values = np.exp(-0.5 * z * z) / (self.std * _SQRT_2PI)
        return values if values.ndim else float(values)

    def effective_support(self) -> Tuple[float, float]:
        return self.mean - 6 * self.std, self.mean + 6 * self.std


class BetaTarget(ScaledBeta):
    """Scaled-beta target pdf."""

    family: Literal["scaled-beta"] = "scaled-beta"

    def effective_support(self) -> Tuple[float, float]:
        return self.support


TargetDensity = Annotated[
    Union[GaussianTarget, BetaTarget], Field(discriminator="family")
]


def target_pdf_on_grid(
    target: TargetDensity, grid: QuadratureGrid, renormalize: bool = True
) -> DensityVector:
    """Evaluate the target at the grid nodes, rescaled to unit quadrature mass by default."""
    values = np.asarray(target.pdf(grid.nodes), dtype=float)
    if renormalize:
        mass = grid.integrate(values)
        if mass <= 0:
            raise GridError(
                f"target {target.family} has no mass on "
                f"[{grid.f_lower}, {grid.f_upper}]"
            )
        values = values / mass
    return DensityVector(grid=grid, values=values)


def relative_target(
    reference: DensityVector, mean_shift: float = 0.0, std_ratio: float = 1.0
) -> GaussianTarget:
    """Gaussian target placed relative to the moments of a reference density."""
    if std_ratio <= 0:
        raise ValueError(f"std_ratio must be positive, got {std_ratio}")
    mean, variance = reference.moments()
    return GaussianTarget(mean=mean + mean_shift, std=std_ratio * np.sqrt(variance))
