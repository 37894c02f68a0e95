"""Kernel-density-estimate density-matching with analytic design gradients."""

from typing import Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.exceptions import BandwidthError, DensityMatchError
from app.logger import logger
from app.quadrature import DensityVector, QuadratureGrid, check_same_grid, distance

_SQRT_2PI = np.sqrt(2.0 * np.pi)

BandwidthRule = Literal["silverman", "scott"]


class KdeConfig(BaseModel):
    """Kernel and bandwidth settings."""

    model_config = ConfigDict(frozen=True)

    bandwidth: Union[float, BandwidthRule] = Field(
        "silverman", description="Explicit bandwidth h or a rule name"
    )
    kernel: Literal["gaussian"] = Field("gaussian", description="Kernel family")
    max_dense_entries: int = Field(
        4_000_000,
        gt=0,
        description="Largest N*M kernel block held in memory at once",
    )

    @field_validator("bandwidth")
    @classmethod
    def check_bandwidth(cls, v):
        if isinstance(v, float) and not v > 0:
            raise ValueError(f"explicit bandwidth must be positive, got {v}")
        return v


class SampleResponses(BaseModel):
    """Qoi values f_j(s) at frozen uncertainty samples and their Jacobian F'."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    jacobian: Optional[np.ndarray] = None

    @field_validator("values", mode="before")
    @classmethod
    def as_values(cls, v):
        return np.atleast_1d(np.array(v, dtype=float))

    @field_validator("jacobian", mode="before")
    @classmethod
    def as_jacobian(cls, v):
        if v is None:
            return None
        array = np.array(v, dtype=float)
        return array.reshape(-1, 1) if array.ndim == 1 else array

    @model_validator(mode="after")
    def check_shapes(self) -> "SampleResponses":
        if self.jacobian is not None and self.jacobian.shape[0] != self.values.shape[0]:
            raise ValueError(
                f"jacobian has {self.jacobian.shape[0]} rows for "
                f"{self.values.shape[0]} samples"
            )
        return self

    @property
    def size(self) -> int:
        return self.values.shape[0]


def kernel_and_derivative(
    kernel: str, h: float, x
) -> Tuple[np.ndarray, np.ndarray]:
    """K_h(x) and dK_h/dx."""
    if kernel != "gaussian":
        raise DensityMatchError(f"Unsupported kernel: {kernel}")
    if not h > 0:
        raise BandwidthError(f"bandwidth must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    k = np.exp(-0.5 * (x / h) ** 2) / (h * _SQRT_2PI)
    return k, -x / (h * h) * k


def _spread(values: np.ndarray) -> Tuple[float, float]:
    if values.shape[0] < 2:
        raise BandwidthError(
            f"at least 2 samples are needed for a bandwidth rule, got {values.shape[0]}"
        )
    std = float(np.std(values, ddof=1))
    q75, q25 = np.percentile(values, [75, 25], method="hazen")
    return std, float(q75 - q25) / 1.34


def silverman_bandwidth(values) -> float:
    """h = 0.9 min(std, IQR/1.34) M^(-1/5)."""
    values = np.asarray(values, dtype=float)
    std, iqr_scale = _spread(values)
    scale = min(std, iqr_scale) if iqr_scale > 0 else std
    if not scale > 0:
        raise BandwidthError("samples have zero spread; bandwidth is undefined")
    return 0.9 * scale * values.shape[0] ** (-0.2)


def scott_bandwidth(values) -> float:
    """h = 1.06 std M^(-1/5)."""
    values = np.asarray(values, dtype=float)
    std, _ = _spread(values)
    if not std > 0:
        raise BandwidthError("samples have zero spread; bandwidth is undefined")
    return 1.06 * std * values.shape[0] ** (-0.2)


BANDWIDTH_RULES = {
    "silverman": silverman_bandwidth,
    "scott": scott_bandwidth,
}


def resolve_bandwidth(cfg: KdeConfig, values) -> float:
    if isinstance(cfg.bandwidth, str):
        h = BANDWIDTH_RULES[cfg.bandwidth](values)
        logger.debug(f"Resolved {cfg.bandwidth} bandwidth h={h:.6g}")
        return h
    return float(cfg.bandwidth)


def _blocks(n_nodes: int, n_samples: int, cfg: KdeConfig):
    # one block when the full N x M matrix fits, fixed-size column blocks otherwise
    if n_nodes * n_samples <= cfg.max_dense_entries:
        yield slice(0, n_samples)
        return
    width = max(1, cfg.max_dense_entries // n_nodes)
    for start in range(0, n_samples, width):
        yield slice(start, min(start + width, n_samples))


def kde_estimate(
    samples: SampleResponses,
    grid: QuadratureGrid,
    cfg: KdeConfig,
    bandwidth: Optional[float] = None,
) -> DensityVector:
    """q_i = (1/M) sum_j K_h(f_i - f_j), i.e. K e."""
    h = bandwidth if bandwidth is not None else resolve_bandwidth(cfg, samples.values)
    nodes = grid.nodes
    total = np.zeros(grid.n_points)
    for block in _blocks(grid.n_points, samples.size, cfg):
        k, _ = kernel_and_derivative(
            cfg.kernel, h, nodes[:, None] - samples.values[None, block]
        )
        total += k.sum(axis=1)
    return DensityVector(grid=grid, values=total / samples.size)


def kde_gradient(
    samples: SampleResponses,
    grid: QuadratureGrid,
    cfg: KdeConfig,
    target: DensityVector,
    bandwidth: Optional[float] = None,
    estimate: Optional[DensityVector] = None,
) -> np.ndarray:
    """2 (t - K e)^T W K' F' as a design-space vector.

    The bandwidth is held fixed; derivatives of a rule-based h are not included.
    """
    if samples.jacobian is None:
        raise DensityMatchError("kde gradient requires the sample Jacobian F'")
    h = bandwidth if bandwidth is not None else resolve_bandwidth(cfg, samples.values)
    if estimate is None:
        estimate = kde_estimate(samples, grid, cfg, bandwidth=h)
    check_same_grid(target, estimate)

    weighted_residual = grid.weights * (target.values - estimate.values)
    nodes = grid.nodes
    gradient = np.zeros(samples.jacobian.shape[1])
    for block in _blocks(grid.n_points, samples.size, cfg):
        _, dk = kernel_and_derivative(
            cfg.kernel, h, nodes[:, None] - samples.values[None, block]
        )
        gradient += (weighted_residual @ dk) @ samples.jacobian[block]
    return 2.0 * gradient / samples.size


def kde_distance_and_gradient(
    samples: SampleResponses,
    grid: QuadratureGrid,
    cfg: KdeConfig,
    target: DensityVector,
    bandwidth: float,
) -> Tuple[float, np.ndarray, DensityVector]:
    estimate = kde_estimate(samples, grid, cfg, bandwidth=bandwidth)
    d = distance(target, estimate)
    gradient = kde_gradient(
        samples, grid, cfg, target, bandwidth=bandwidth, estimate=estimate
    )
    return d, gradient, estimate
