from abc import ABC, abstractmethod
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.exceptions import DomainError, ModelError
from app.schema import ModelEvaluation


class UncertainModel(BaseModel, ABC):
    """
    Stand-in for a flow solve followed by its adjoint.

    Given a design s and an uncertainty state U, returns the qoi and dQ/ds.
    Implementations must be deterministic and monotonic in U on [u_lower, u_upper].
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str = Field(..., description="Model name")
    n_design: int = Field(..., ge=1, description="Number of design variables")
    u_lower: float = Field(..., description="Lower uncertainty bound U_L")
    u_upper: float = Field(..., description="Upper uncertainty bound U_U")
    design_lower: Optional[List[float]] = Field(
        None, description="Per-variable lower design bounds"
    )
    design_upper: Optional[List[float]] = Field(
        None, description="Per-variable upper design bounds"
    )

    @model_validator(mode="after")
    def check_bounds(self) -> "UncertainModel":
        if not self.u_lower < self.u_upper:
            raise ValueError(
                f"u_lower ({self.u_lower}) must be below u_upper ({self.u_upper})"
            )
        for bound in (self.design_lower, self.design_upper):
            if bound is not None and len(bound) != self.n_design:
                raise ValueError(
                    f"design bounds need {self.n_design} entries, got {len(bound)}"
                )
        return self

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lower = (
            np.asarray(self.design_lower, dtype=float)
            if self.design_lower is not None
            else np.full(self.n_design, -np.inf)
        )
        upper = (
            np.asarray(self.design_upper, dtype=float)
            if self.design_upper is not None
            else np.full(self.n_design, np.inf)
        )
        return lower, upper

    def check_design(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if s.shape != (self.n_design,):
            raise ModelError(
                f"{self.name} expects {self.n_design} design variables, got {s.shape}"
            )
        lower, upper = self.bounds
        if np.any(s < lower) or np.any(s > upper):
            raise DomainError(f"design {s.tolist()} lies outside the design bounds")
        return s

    def check_uncertainty(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if np.any(u < self.u_lower) or np.any(u > self.u_upper):
            raise DomainError(
                f"uncertainty outside [{self.u_lower}, {self.u_upper}]"
            )
        return u

    def evaluate(self, s, u: float) -> ModelEvaluation:
        """Qoi and design sensitivities at one (s, U)."""
        s = self.check_design(s)
        u = float(self.check_uncertainty(u))
        q, dq_ds = self._evaluate(s, np.array([u]))
        return ModelEvaluation(u=u, q=float(q[0]), dq_ds=dq_ds[0])

    def evaluate_many(self, s, us: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorized evaluation at many states: (M,) qoi values and (M, n) Jacobian."""
        s = self.check_design(s)
        us = np.atleast_1d(self.check_uncertainty(us))
        return self._evaluate(s, us)

    @abstractmethod
    def _evaluate(self, s: np.ndarray, us: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return q(s, us) with shape (M,) and dq/ds with shape (M, n_design)."""
