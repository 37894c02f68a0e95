"""Independent checks for the analytic machinery.

Monte-Carlo propagation, histogram densities and central finite differences
live here rather than in the test suite so ``verify`` can run them anywhere.
The reference distance deliberately shares no code with the matching modules.
"""

from pathlib import Path
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import stats

from app.densities import ScaledBeta
from app.exceptions import GridError
from app.models.base import UncertainModel
from app.quadrature import DensityVector, write_rows_csv

# relative per-coordinate step for central differences
FD_RELATIVE_STEP = 1e-5
# step multipliers tried by refined_error
FD_REFINEMENTS = (1.0, 0.1, 0.01)


class Histogram(BaseModel):
    """Equal-width bins with densities normalized to unit area."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    edges: np.ndarray
    densities: np.ndarray

    @model_validator(mode="after")
    def check_bins(self) -> "Histogram":
        if self.edges.ndim != 1 or self.edges.shape[0] != self.densities.shape[0] + 1:
            raise ValueError("a histogram needs one more edge than bins")
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("histogram edges must be strictly ascending")
        return self

    @property
    def n_bins(self) -> int:
        return self.densities.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def range(self) -> Tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    def integral(self) -> float:
        return float(np.dot(self.densities, self.widths))

    def l2_distance(self, values: np.ndarray) -> float:
        """L2 distance to piecewise-constant values on the same bins."""
        residual = self.densities - np.asarray(values, dtype=float)
        return float(np.sqrt(np.dot(residual * residual, self.widths)))

    def rows(self) -> Iterable[Tuple[float, float, float]]:
        return zip(self.edges[:-1], self.edges[1:], self.densities)


def mc_propagate(
    model: UncertainModel, s, p: ScaledBeta, n_samples: int, seed: int
) -> np.ndarray:
    """Qoi values Q(s, u_j) for u_j drawn from p."""
    us = p.sample(n_samples, seed)
    q, _ = model.evaluate_many(s, us)
    return q


def mc_surrogate(
    slope: float, shift: float, p: ScaledBeta, n_samples: int, seed: int
) -> np.ndarray:
    """Samples of the linear surrogate a U + b."""
    return slope * p.sample(n_samples, seed) + shift


def histogram_density(
    samples, n_bins: int, bounds: Optional[Tuple[float, float]] = None
) -> Histogram:
    """Equal-width histogram normalized to unit area.

    Bins span the sample range unless ``bounds`` is given, in which case
    samples outside the bounds are dropped before normalizing.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    if samples.shape[0] < 2:
        raise ValueError(f"a histogram needs at least 2 samples, got {samples.shape[0]}")
    lower, upper = bounds if bounds is not None else (samples.min(), samples.max())
    if not upper > lower:
        raise GridError(f"degenerate histogram range [{lower}, {upper}]")
    counts, edges = np.histogram(samples, bins=n_bins, range=(lower, upper))
    total = counts.sum()
    if total == 0:
        raise GridError(f"no samples inside [{lower}, {upper}]")
    return Histogram(edges=edges, densities=counts / (total * np.diff(edges)))


def self_noise(samples_a, samples_b, n_bins: int) -> Tuple[Histogram, float]:
    """Histogram of ``samples_a`` and its L2 distance to a histogram of
    ``samples_b`` on the same bins."""
    reference = histogram_density(samples_a, n_bins)
    other = histogram_density(samples_b, n_bins, bounds=reference.range)
    return reference, reference.l2_distance(other.densities)


def _steps(s: np.ndarray, step) -> np.ndarray:
    if step is None:
        return FD_RELATIVE_STEP * np.maximum(1.0, np.abs(s))
    steps = np.broadcast_to(np.asarray(step, dtype=float), s.shape)
    if np.any(steps <= 0):
        raise ValueError("finite-difference steps must be positive")
    return steps


def finite_diff_jacobian(
    fn: Callable[[np.ndarray], np.ndarray],
    s,
    step: Optional[Union[float, np.ndarray]] = None,
) -> np.ndarray:
    """Central-difference Jacobian of a vector function, shape (m, n)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    columns = []
    for k, h in enumerate(_steps(s, step)):
        forward, backward = s.copy(), s.copy()
        forward[k] += h
        backward[k] -= h
        columns.append(
            (np.asarray(fn(forward), dtype=float) - np.asarray(fn(backward), dtype=float))
            / (2.0 * h)
        )
    return np.column_stack(columns)


def finite_diff_gradient(
    objective: Callable[[np.ndarray], float],
    s,
    step: Optional[Union[float, np.ndarray]] = None,
) -> np.ndarray:
    """Central differences, one pair of objective calls per coordinate."""
    return finite_diff_jacobian(lambda x: np.atleast_1d(objective(x)), s, step)[0]


def relative_error(analytic, reference, floor: float = 1e-12) -> float:
    """max |analytic - reference| / max |reference|, ignoring components
    where the analytic value is below ``floor`` in magnitude."""
    analytic = np.asarray(analytic, dtype=float)
    reference = np.asarray(reference, dtype=float)
    mask = np.abs(analytic) >= floor
    if not np.any(mask):
        return float(np.max(np.abs(reference), initial=0.0))
    scale = np.max(np.abs(reference[mask]))
    error = np.max(np.abs(analytic[mask] - reference[mask]))
    return float(error / scale) if scale > 0 else float(error)


def refined_error(
    analytic,
    differences: Callable[[np.ndarray], np.ndarray],
    s,
    refinements: Iterable[float] = FD_REFINEMENTS,
) -> Tuple[float, np.ndarray]:
    """Smallest relative error of ``analytic`` over a ladder of shrinking steps.

    ``differences(step)`` returns the central-difference estimate for the
    per-coordinate steps ``step``; each refinement scales the default steps.
    Near a singular image end the discretized distance bends sharply, and the
    default step alone can carry a truncation error above the tolerance.
    Returns the error and the reference that produced it.
    """
    base = _steps(np.atleast_1d(np.asarray(s, dtype=float)), None)
    best: Optional[Tuple[float, np.ndarray]] = None
    for factor in refinements:
        reference = np.asarray(differences(factor * base), dtype=float)
        error = relative_error(analytic, reference)
        if best is None or error < best[0]:
            best = (error, reference)
    if best is None:
        raise ValueError("at least one finite-difference refinement is required")
    return best


def reference_pdf(slope: float, shift: float, p: ScaledBeta, nodes) -> np.ndarray:
    """Change of variables through scipy's beta distribution."""
    dist = stats.beta(p.alpha, p.beta_shape, loc=p.lower, scale=p.width)
    return dist.pdf((np.asarray(nodes) - shift) / slope) / abs(slope)


def reference_distance(
    model: UncertainModel, s, p: ScaledBeta, target: DensityVector
) -> float:
    """Monotonic distance recomputed from scratch: a least-squares line through
    the two bounding states and the scipy pdf, on the target's grid."""
    us = np.array([p.lower, p.upper])
    q, _ = model.evaluate_many(s, us)
    slope, shift = np.polyfit(us, q, 1)
    grid = target.grid
    residual = target.values - reference_pdf(slope, shift, p, grid.nodes)
    return float(np.sum(residual * residual * grid.weights))


def write_histogram_csv(path: Union[str, Path], histogram: Histogram) -> Path:
    return write_rows_csv(path, ["edge_lo", "edge_hi", "density"], histogram.rows())
