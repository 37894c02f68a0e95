from typing import Tuple

import numpy as np
from pydantic import Field

from app.matching.base import BaseMatcher, EvaluationRecord
from app.matching.monotonic import (
    LinearSurrogate,
    SurrogateStates,
    derived_pdf,
    distance_and_gradient,
    fit_surrogate,
)
from app.models.base import UncertainModel
from app.quadrature import DensityVector, QuadratureGrid
from app.schema import StateBatch


class MonotonicMatcher(BaseMatcher):
    """Two evaluations per design, at the ends of the uncertainty interval."""

    name: str = "monotonic"
    uncorrected_shift: bool = Field(
        False, description="Use the uncorrected closed-form shift (diagnostics only)"
    )

    def states(self, model: UncertainModel) -> np.ndarray:
        return np.array([self.uncertainty.lower, self.uncertainty.upper])

    def surrogate(self, states: StateBatch) -> LinearSurrogate:
        first, second = states[0], states[1]
        return fit_surrogate(
            SurrogateStates(
                u1=first.u,
                u2=second.u,
                q1=first.q,
                q2=second.q,
                dq1_ds=first.dq_ds,
                dq2_ds=second.dq_ds,
            ),
            uncorrected_shift=self.uncorrected_shift,
        )

    def density(self, states: StateBatch, grid: QuadratureGrid) -> DensityVector:
        return derived_pdf(self.surrogate(states), self.uncertainty, grid)

    def assemble(
        self, s: np.ndarray, states: StateBatch, target: DensityVector
    ) -> EvaluationRecord:
        sur = self.surrogate(states)
        d, gradient = distance_and_gradient(sur, self.uncertainty, target.grid, target)
        return EvaluationRecord(
            s=np.array(s, dtype=float),
            states=states,
            distance=d,
            gradient=gradient,
            density=derived_pdf(sur, self.uncertainty, target.grid),
            slope=sur.a,
            shift=sur.b,
        )

    def qoi_range(self, states: StateBatch) -> Tuple[float, float]:
        return self.surrogate(states).image(self.uncertainty)

    def qoi_moments(self, states: StateBatch) -> Tuple[float, float]:
        sur = self.surrogate(states)
        mean, variance = self.uncertainty.moments()
        return sur.a * mean + sur.b, sur.a**2 * variance
