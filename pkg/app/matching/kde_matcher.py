import asyncio
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from pydantic import Field, PrivateAttr

from app.logger import logger
from app.matching.base import BaseMatcher, EvaluationRecord
from app.matching.kde import (
    KdeConfig,
    SampleResponses,
    kde_distance_and_gradient,
    kde_estimate,
    resolve_bandwidth,
)
from app.models.base import UncertainModel
from app.quadrature import DensityVector, QuadratureGrid
from app.schema import StateBatch


class KdeMatcher(BaseMatcher):
    """
    Evaluates each design at M frozen uncertainty samples and smooths the
    responses with a Gaussian kernel. The bandwidth is fixed on first use so
    the objective stays a smooth function of the design.
    """

    name: str = "kde"
    n_samples: int = Field(10_000, ge=2, description="Number of frozen samples M")
    sample_seed: int = Field(0, description="Seed for the frozen samples")
    kde: KdeConfig = Field(default_factory=KdeConfig)

    _bandwidth: Optional[float] = PrivateAttr(default=None)

    @cached_property
    def samples(self) -> np.ndarray:
        return self.uncertainty.sample(self.n_samples, self.sample_seed)

    @property
    def bandwidth(self) -> Optional[float]:
        return self._bandwidth

    def fix_bandwidth(self, states: StateBatch) -> float:
        if self._bandwidth is None:
            self._bandwidth = resolve_bandwidth(self.kde, states.q)
            logger.info(f"KDE bandwidth fixed at h={self._bandwidth:.6g}")
        return self._bandwidth

    def prepare(self, states: StateBatch) -> None:
        self.fix_bandwidth(states)

    def states(self, model: UncertainModel) -> np.ndarray:
        return self.samples

    def evaluate(self, model: UncertainModel, s) -> StateBatch:
        us = self.states(model)
        q, dq_ds = model.evaluate_many(s, us)
        return StateBatch(u=us, q=q, dq_ds=dq_ds)

    async def evaluate_async(self, model: UncertainModel, s) -> StateBatch:
        return await asyncio.to_thread(self.evaluate, model, s)

    def responses(self, states: StateBatch) -> SampleResponses:
        return SampleResponses(values=states.q, jacobian=states.dq_ds)

    def density(self, states: StateBatch, grid: QuadratureGrid) -> DensityVector:
        return kde_estimate(
            self.responses(states), grid, self.kde, bandwidth=self.fix_bandwidth(states)
        )

    def assemble(
        self, s: np.ndarray, states: StateBatch, target: DensityVector
    ) -> EvaluationRecord:
        d, gradient, estimate = kde_distance_and_gradient(
            self.responses(states),
            target.grid,
            self.kde,
            target,
            bandwidth=self.fix_bandwidth(states),
        )
        return EvaluationRecord(
            s=np.array(s, dtype=float),
            states=states,
            distance=d,
            gradient=gradient,
            density=estimate,
        )

    def qoi_range(self, states: StateBatch) -> Tuple[float, float]:
        h = self.fix_bandwidth(states)
        return float(states.q.min() - 6 * h), float(states.q.max() + 6 * h)

    def qoi_moments(self, states: StateBatch) -> Tuple[float, float]:
        return float(states.q.mean()), float(states.q.var(ddof=1))
