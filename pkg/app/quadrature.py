"""Equispaced quadrature grids over the qoi axis and the discretized L2 distance."""

import csv
from functools import cached_property
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.exceptions import GridError


def format_float(value: float) -> str:
    """Format a float with 17 significant digits (round-trip exact)."""
    return format(float(value), ".17g")


class QuadratureGrid(BaseModel):
    """N equispaced nodes on [f_lower, f_upper] with composite trapezoid weights."""

    model_config = ConfigDict(frozen=True)

    f_lower: float = Field(..., description="Lower qoi bound")
    f_upper: float = Field(..., description="Upper qoi bound")
    n_points: int = Field(..., description="Number of quadrature nodes N")

    @model_validator(mode="after")
    def check_bounds(self) -> "QuadratureGrid":
        if not np.isfinite(self.f_lower) or not np.isfinite(self.f_upper):
            raise ValueError("grid bounds must be finite")
        if self.f_upper <= self.f_lower:
            raise ValueError(
                f"f_upper ({self.f_upper}) must exceed f_lower ({self.f_lower})"
            )
        if self.n_points < 2:
            raise ValueError(f"n_points must be at least 2, got {self.n_points}")
        return self

    @property
    def spacing(self) -> float:
        return (self.f_upper - self.f_lower) / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = self.f_lower + self.spacing * np.arange(self.n_points)
        nodes[-1] = self.f_upper
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def weights(self) -> np.ndarray:
        weights = np.full(self.n_points, self.spacing)
        weights[0] = weights[-1] = 0.5 * self.spacing
        weights.setflags(write=False)
        return weights

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid integral of nodal values."""
        return float(np.dot(self.weights, values))

    def same_as(self, other: "QuadratureGrid") -> bool:
        return (
            self.f_lower == other.f_lower
            and self.f_upper == other.f_upper
            and self.n_points == other.n_points
        )


class DensityVector(BaseModel):
    """Density values at the nodes of a quadrature grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: QuadratureGrid
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def as_array(cls, v):
        array = np.array(v, dtype=float)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def check_values(self) -> "DensityVector":
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} values, got shape {self.values.shape}"
            )
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite and nonnegative")
        return self

    def integral(self) -> float:
        return self.grid.integrate(self.values)

    def moments(self) -> Tuple[float, float]:
        """Quadrature mean and variance, normalized by the quadrature mass."""
        mass = self.integral()
        if mass <= 0:
            raise GridError("density has no mass on its grid")
        nodes = self.grid.nodes
        mean = self.grid.integrate(nodes * self.values) / mass
        variance = self.grid.integrate((nodes - mean) ** 2 * self.values) / mass
        return mean, variance

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.integrate(self.values**2)))

    def rows(self) -> Iterable[Tuple[float, float]]:
        return zip(self.grid.nodes, self.values)


def make_grid(f_lower: float, f_upper: float, n_points: int) -> QuadratureGrid:
    """Build an equispaced trapezoid grid, raising GridError on invalid input."""
    try:
        return QuadratureGrid(f_lower=f_lower, f_upper=f_upper, n_points=n_points)
    except ValueError as e:
        raise GridError(f"Invalid quadrature grid: {e}") from e


def check_same_grid(a: DensityVector, b: DensityVector) -> None:
    if not a.grid.same_as(b.grid):
        raise GridError(
            f"density vectors live on different grids: "
            f"[{a.grid.f_lower}, {a.grid.f_upper}]x{a.grid.n_points} vs "
            f"[{b.grid.f_lower}, {b.grid.f_upper}]x{b.grid.n_points}"
        )


def distance(t: DensityVector, r: DensityVector) -> float:
    """Discretized squared L2 distance (t - r)^T W (t - r)."""
    check_same_grid(t, r)
    residual = t.values - r.values
    return float(np.dot(residual * residual, t.grid.weights))


def auto_bounds(
    *intervals: Tuple[float, float], padding: float = 0.1
) -> Tuple[float, float]:
    """Union of intervals, padded on each side by a fraction of the union width."""
    if not intervals:
        raise GridError("at least one interval is required for automatic bounds")
    lower = min(min(lo, hi) for lo, hi in intervals)
    upper = max(max(lo, hi) for lo, hi in intervals)
    if upper <= lower:
        raise GridError(f"automatic bounds collapsed to a point at {lower}")
    pad = padding * (upper - lower)
    return lower - pad, upper + pad


def write_density_csv(path: Union[str, Path], density: DensityVector) -> Path:
    """Write (node, value) rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["node", "value"])
        for node, value in density.rows():
            writer.writerow([format_float(node), format_float(value)])
    return path


def write_rows_csv(
    path: Union[str, Path], header: List[str], rows: Iterable[Iterable]
) -> Path:
    """Write a header plus rows, formatting floats with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    format_float(x) if isinstance(x, (float, np.floating)) else x
                    for x in row
                ]
            )
    return path
