from abc import ABC, abstractmethod
from typing import Awaitable, Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.exceptions import DensityMatchError, OptimizationError
from app.logger import logger
from app.matching.base import EvaluationRecord
from app.schema import CallRecord, OptimizerMethod, RunTrace, TerminationReason

Objective = Callable[[np.ndarray], Awaitable[EvaluationRecord]]


class OptimizerConfig(BaseModel):
    """Budget, tolerances and line-search parameters."""

    max_function_calls: int = Field(40, ge=1, description="Function call budget")
    design_tolerance: float = Field(
        1e-5, gt=0, description="Stop when a step is shorter than this"
    )
    gradient_tolerance: float = Field(
        1e-10, gt=0, description="Stop when the projected gradient norm is below this"
    )
    shrink: float = Field(0.5, gt=0, lt=1, description="Backtracking factor")
    sufficient_decrease: float = Field(
        1e-4, gt=0, lt=1, description="Armijo constant"
    )
    initial_step: float = Field(
        1.0, gt=0, description="Length of the first trial step in design space"
    )
    method: OptimizerMethod = Field(OptimizerMethod.BFGS, description="Search direction")

    @model_validator(mode="after")
    def check_tolerances(self) -> "OptimizerConfig":
        if self.initial_step <= self.design_tolerance:
            raise ValueError("initial_step must exceed design_tolerance")
        return self


class BaseOptimizer(BaseModel, ABC):
    """Bound-projected descent on an async objective; each evaluation is one call."""

    config: OptimizerConfig = Field(default_factory=OptimizerConfig)

    async def call(
        self, objective: Objective, s: np.ndarray, trace: RunTrace
    ) -> EvaluationRecord:
        """Run one function call and append it to the trace."""
        try:
            result = await objective(s)
        except DensityMatchError as e:
            trace.termination = TerminationReason.ERROR
            trace.message = str(e)
            logger.error(f"Objective failed at call {trace.function_calls + 1}: {e}")
            raise OptimizationError(str(e), trace=trace) from e

        mean = variance = None
        try:
            mean, variance = result.density.moments()
        except DensityMatchError:
            pass
        record = trace.append(
            CallRecord(
                call=trace.function_calls + 1,
                s=result.s.tolist(),
                distance=result.distance,
                normalized_distance=1.0,
                gradient_norm=result.gradient_norm,
                model_evaluations=self.evaluations_so_far(trace, result),
                slope=result.slope,
                shift=result.shift,
                mean=mean,
                variance=variance,
            )
        )
        logger.info(
            f"call {record.call}: d={record.distance:.6e} "
            f"(normalized {record.normalized_distance:.6f}), "
            f"|grad|={record.gradient_norm:.3e}"
            + (
                f", a={record.slope:.6g}, b={record.shift:.6g}"
                if record.slope is not None
                else ""
            )
        )
        return result

    @staticmethod
    def evaluations_so_far(trace: RunTrace, result: EvaluationRecord) -> int:
        return trace.model_evaluations + result.states.size

    @staticmethod
    def project(s: np.ndarray, bounds: Tuple[np.ndarray, np.ndarray]) -> np.ndarray:
        return np.clip(s, bounds[0], bounds[1])

    @staticmethod
    def free_mask(
        s: np.ndarray, gradient: np.ndarray, bounds: Tuple[np.ndarray, np.ndarray]
    ) -> np.ndarray:
        """Variables not pinned at a bound by a gradient pointing outward."""
        at_lower = (s <= bounds[0]) & (gradient > 0)
        at_upper = (s >= bounds[1]) & (gradient < 0)
        return ~(at_lower | at_upper)

    @abstractmethod
    async def minimize(
        self,
        objective: Objective,
        s0,
        bounds: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ) -> RunTrace:
        """Minimize the objective from s0 and return the per-call trace."""
