from enum import Enum
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class MatcherType(str, Enum):
    """Density-matching formulations"""

    MONOTONIC = "monotonic"
    KDE = "kde"


MATCHER_VALUES = tuple(kind.value for kind in MatcherType)
MATCHER_TYPE = Literal[MATCHER_VALUES]  # type: ignore


class ModelType(str, Enum):
    """Shipped uncertain models"""

    EXAMPLE = "example"
    FAN = "fan"


MODEL_VALUES = tuple(kind.value for kind in ModelType)
MODEL_TYPE = Literal[MODEL_VALUES]  # type: ignore


class OptimizerMethod(str, Enum):
    """Search directions available to the optimizer"""

    BFGS = "quasi-newton-bfgs"
    STEEPEST_DESCENT = "steepest-descent"


OPTIMIZER_METHOD_VALUES = tuple(method.value for method in OptimizerMethod)
OPTIMIZER_METHOD_TYPE = Literal[OPTIMIZER_METHOD_VALUES]  # type: ignore


class TerminationReason(str, Enum):
    """Why an optimization run stopped"""

    BUDGET = "function_call_budget"
    STEP_TOLERANCE = "step_below_tolerance"
    GRADIENT_TOLERANCE = "gradient_below_tolerance"
    LINE_SEARCH_FAILED = "line_search_failed"
    ERROR = "objective_error"


class ModelEvaluation(BaseModel):
    """One nonlinear solve plus its adjoint: the qoi and its design sensitivities."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    u: float = Field(..., description="Uncertainty state")
    q: float = Field(..., description="Quantity of interest")
    dq_ds: np.ndarray = Field(..., description="Design sensitivities dQ/ds")

    @field_validator("dq_ds", mode="before")
    @classmethod
    def as_array(cls, v):
        array = np.atleast_1d(np.array(v, dtype=float))
        array.setflags(write=False)
        return array


class CallRecord(BaseModel):
    """Summary of one function call (one objective evaluation)."""

    call: int = Field(..., description="1-based function call index")
    s: List[float] = Field(..., description="Design evaluated")
    distance: float = Field(..., description="Raw density-matching distance")
    normalized_distance: float = Field(
        ..., description="Distance divided by the first call's distance"
    )
    gradient_norm: float = Field(..., description="Euclidean norm of the gradient")
    model_evaluations: int = Field(
        ..., description="Cumulative model evaluations after this call"
    )
    accepted: bool = Field(False, description="Whether the design became an iterate")
    slope: Optional[float] = Field(None, description="Surrogate slope a")
    shift: Optional[float] = Field(None, description="Surrogate shift b")
    mean: Optional[float] = Field(None, description="Mean of the design pdf")
    variance: Optional[float] = Field(None, description="Variance of the design pdf")


class RunTrace(BaseModel):
    """Per-call history of an optimization run."""

    records: List[CallRecord] = Field(default_factory=list)
    termination: Optional[TerminationReason] = None
    iterations: int = Field(0, description="Accepted steps (major iterations)")
    message: Optional[str] = None

    @property
    def function_calls(self) -> int:
        return len(self.records)

    @property
    def model_evaluations(self) -> int:
        return self.records[-1].model_evaluations if self.records else 0

    @property
    def best(self) -> Optional[CallRecord]:
        accepted = [r for r in self.records if r.accepted]
        return min(accepted, key=lambda r: r.distance) if accepted else None

    def append(self, record: CallRecord) -> CallRecord:
        if not self.records:
            record.normalized_distance = 1.0
        else:
            first = self.records[0].distance
            record.normalized_distance = record.distance / first if first > 0 else 0.0
        self.records.append(record)
        return record

    def convergence_rows(self) -> List[tuple]:
        return [
            (r.call, r.normalized_distance, r.gradient_norm) for r in self.records
        ]


class StateBatch(BaseModel):
    """Model evaluations at several uncertainty states of one design."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    u: np.ndarray = Field(..., description="Uncertainty states, shape (M,)")
    q: np.ndarray = Field(..., description="Qoi values, shape (M,)")
    dq_ds: np.ndarray = Field(..., description="Adjoint rows, shape (M, n)")

    @classmethod
    def from_evaluations(cls, evaluations: List[ModelEvaluation]) -> "StateBatch":
        return cls(
            u=np.array([e.u for e in evaluations]),
            q=np.array([e.q for e in evaluations]),
            dq_ds=np.vstack([e.dq_ds for e in evaluations]),
        )

    @property
    def size(self) -> int:
        return self.q.shape[0]

    def __getitem__(self, index: int) -> ModelEvaluation:
        return ModelEvaluation(u=self.u[index], q=self.q[index], dq_ds=self.dq_ds[index])
