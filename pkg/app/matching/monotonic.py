"""Monotonic density-matching.

The qoi pdf is propagated exactly through a two-state linear surrogate
``Q = a U + b`` with the change-of-variables rule, so each design costs two
model evaluations and no kernel smoothing is involved.
"""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.densities import ScaledBeta
from app.exceptions import DegenerateSurrogateError
from app.logger import logger
from app.quadrature import DensityVector, QuadratureGrid, check_same_grid, distance

# rows of D closest to an image endpoint where p' diverges
ENDPOINT_ROWS = 2
# standardized distance below which a node counts as sitting on the endpoint
ENDPOINT_GUARD = 1e-8


def _vector(v) -> np.ndarray:
    array = np.atleast_1d(np.array(v, dtype=float))
    array.setflags(write=False)
    return array


class SurrogateStates(BaseModel):
    """Two (U, Q) states with the adjoint sensitivities of each Q."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    u1: float
    u2: float
    q1: float
    q2: float
    dq1_ds: np.ndarray
    dq2_ds: np.ndarray

    @field_validator("dq1_ds", "dq2_ds", mode="before")
    @classmethod
    def as_vector(cls, v):
        return _vector(v)

    @model_validator(mode="after")
    def check_states(self) -> "SurrogateStates":
        if not self.u1 < self.u2:
            raise ValueError(f"u1 ({self.u1}) must be strictly below u2 ({self.u2})")
        if self.dq1_ds.shape != self.dq2_ds.shape:
            raise ValueError("state sensitivities must share the design dimension")
        return self


class LinearSurrogate(BaseModel):
    """g(U) = a U + b with the design sensitivities of a and b."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: float = Field(..., description="Slope")
    b: float = Field(..., description="Shift")
    da_ds: np.ndarray
    db_ds: np.ndarray

    @field_validator("da_ds", "db_ds", mode="before")
    @classmethod
    def as_vector(cls, v):
        return _vector(v)

    def __call__(self, u):
        return self.a * np.asarray(u, dtype=float) + self.b

    def image(self, dist: ScaledBeta) -> Tuple[float, float]:
        ends = (self(dist.lower), self(dist.upper))
        return float(min(ends)), float(max(ends))


class SensitivityMatrix(BaseModel):
    """D[i, k] = d r_i / d s_k, one row per grid node."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: QuadratureGrid
    entries: np.ndarray

    @model_validator(mode="after")
    def check_shape(self) -> "SensitivityMatrix":
        if self.entries.ndim != 2 or self.entries.shape[0] != self.grid.n_points:
            raise ValueError(
                f"expected {self.grid.n_points} rows, got shape {self.entries.shape}"
            )
        return self

    def rows(self):
        return ((node, *row) for node, row in zip(self.grid.nodes, self.entries))


def fit_surrogate(
    states: SurrogateStates, uncorrected_shift: bool = False
) -> LinearSurrogate:
    """Fit the line through both states.

    ``uncorrected_shift`` uses b = (u1 q2 - u2 q1) / du and its derivative
    instead, which flips the sign of the shift. Diagnostics only.
    """
    du = states.u2 - states.u1
    a = (states.q2 - states.q1) / du
    eps_a = 1e-12 * max(abs(states.q1), abs(states.q2), 1.0) / du
    if abs(a) <= eps_a:
        raise DegenerateSurrogateError(
            f"surrogate slope {a!r} is below {eps_a:.3g}: the qoi does not vary "
            f"with the uncertainty and its pdf is a point mass"
        )
    da_ds = (states.dq2_ds - states.dq1_ds) / du
    if uncorrected_shift:
        logger.warning("Using the uncorrected closed-form shift b and db/ds")
        b = (states.u1 * states.q2 - states.u2 * states.q1) / du
        db_ds = (states.u1 * states.dq2_ds - states.u2 * states.dq1_ds) / du
    else:
        b = states.q2 - a * states.u2
        db_ds = (states.u2 * states.dq1_ds - states.u1 * states.dq2_ds) / du
    return LinearSurrogate(a=a, b=b, da_ds=da_ds, db_ds=db_ds)


def derived_pdf(
    sur: LinearSurrogate, p: ScaledBeta, grid: QuadratureGrid
) -> DensityVector:
    """r_i = p((f_i - b) / a) / |a|, zero off the surrogate image."""
    v = (grid.nodes - sur.b) / sur.a
    return DensityVector(grid=grid, values=np.asarray(p.pdf(v)) / abs(sur.a))


def pdf_sensitivity(
    sur: LinearSurrogate,
    p: ScaledBeta,
    grid: QuadratureGrid,
    endpoint_rows: int = ENDPOINT_ROWS,
) -> SensitivityMatrix:
    """Design sensitivities of the derived pdf at every node.

    Where p' is unbounded at a support endpoint, the ``endpoint_rows`` interior
    nodes nearest that end of the image are zeroed, as is any node closer to it
    than ``ENDPOINT_GUARD`` in standardized units.
    """
    a, b = sur.a, sur.b
    n_design = sur.da_ds.shape[0]
    v = (grid.nodes - b) / a
    entries = np.zeros((grid.n_points, n_design))

    interior = np.flatnonzero((v > p.lower) & (v < p.upper))
    if interior.size == 0:
        return SensitivityMatrix(grid=grid, entries=entries)

    vi = v[interior]
    p_v = np.asarray(p.pdf(vi))
    dp_v = np.asarray(p.pdf_derivative(vi))
    # dv/ds_k = (-db_k a - (f - b) da_k) / a^2 = -(db_k + v da_k) / a
    dv_ds = -(sur.db_ds[None, :] + vi[:, None] * sur.da_ds[None, :]) / a
    entries[interior] = (
        -(np.sign(a) / a**2) * p_v[:, None] * sur.da_ds[None, :]
        + dp_v[:, None] * dv_ds / abs(a)
    )

    z = (vi - p.lower) / p.width
    for unbounded, gap in zip(p.derivative_unbounded_at(), (z, 1.0 - z)):
        if not unbounded:
            continue
        near = gap < ENDPOINT_GUARD
        near[np.argsort(gap, kind="stable")[:endpoint_rows]] = True
        entries[interior[near]] = 0.0
    return SensitivityMatrix(grid=grid, entries=entries)


def distance_and_gradient(
    sur: LinearSurrogate, p: ScaledBeta, grid: QuadratureGrid, target: DensityVector
) -> Tuple[float, np.ndarray]:
    """Distance to the target and its design gradient -2 (t - r)^T W D."""
    r = derived_pdf(sur, p, grid)
    check_same_grid(target, r)
    d = distance(target, r)
    # endpoint rows stay: p' is finite at every interior node
    sensitivity = pdf_sensitivity(sur, p, grid, endpoint_rows=0)
    weighted_residual = grid.weights * (r.values - target.values)
    gradient = 2.0 * weighted_residual @ sensitivity.entries
    return d, gradient
