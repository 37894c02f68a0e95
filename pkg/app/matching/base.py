import asyncio
from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.densities import ScaledBeta
from app.models.base import UncertainModel
from app.quadrature import DensityVector, QuadratureGrid
from app.schema import StateBatch


class EvaluationRecord(BaseModel):
    """Everything one function call produced for a design."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    s: np.ndarray
    states: StateBatch
    distance: float
    gradient: np.ndarray
    density: DensityVector
    slope: Optional[float] = None
    shift: Optional[float] = None

    @property
    def gradient_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))


class BaseMatcher(BaseModel, ABC):
    """A density-matching formulation: which states to evaluate and how to score them."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = Field(..., description="Matcher name")
    uncertainty: ScaledBeta = Field(..., description="Input pdf p(U)")

    @abstractmethod
    def states(self, model: UncertainModel) -> np.ndarray:
        """Uncertainty values at which each design is evaluated."""

    def prepare(self, states: StateBatch) -> None:
        """Fix per-run settings from the initial design's states."""

    def evaluate(self, model: UncertainModel, s) -> StateBatch:
        return StateBatch.from_evaluations(
            [model.evaluate(s, u) for u in self.states(model)]
        )

    async def evaluate_async(self, model: UncertainModel, s) -> StateBatch:
        """Evaluate every state concurrently; results keep the state order."""
        tasks = [asyncio.to_thread(model.evaluate, s, u) for u in self.states(model)]
        return StateBatch.from_evaluations(list(await asyncio.gather(*tasks)))

    @abstractmethod
    def density(self, states: StateBatch, grid: QuadratureGrid) -> DensityVector:
        """The design pdf on the grid."""

    @abstractmethod
    def assemble(
        self, s: np.ndarray, states: StateBatch, target: DensityVector
    ) -> EvaluationRecord:
        """Distance and gradient from the evaluated states."""

    @abstractmethod
    def qoi_range(self, states: StateBatch) -> Tuple[float, float]:
        """Interval the design pdf lives on, used for automatic grid bounds."""

    @abstractmethod
    def qoi_moments(self, states: StateBatch) -> Tuple[float, float]:
        """(mean, variance) of the qoi implied by the evaluated states."""
