from abc import ABC, abstractmethod

from pydantic import BaseModel, ConfigDict, Field

from app.matching.base import BaseMatcher
from app.models.base import UncertainModel
from app.optimizer.base import BaseOptimizer
from app.optimizer.quasi_newton import QuasiNewtonOptimizer
from app.schema import RunTrace


class BaseFlow(BaseModel, ABC):
    """Base class for optimization workflows over an uncertain model"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: UncertainModel = Field(..., description="Model evaluated at each design")
    matcher: BaseMatcher = Field(..., description="Density-matching formulation")
    optimizer: BaseOptimizer = Field(default_factory=QuasiNewtonOptimizer)

    @abstractmethod
    async def execute(self, s0) -> RunTrace:
        """Run the workflow from the initial design s0"""
