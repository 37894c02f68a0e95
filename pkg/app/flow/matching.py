from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import Field, PrivateAttr

from app.config import (
    BetaTargetSettings,
    DesignTargetSettings,
    GaussianTargetSettings,
    RelativeTargetSettings,
    TargetSettings,
)
from app.densities import (
    BetaTarget,
    GaussianTarget,
    TargetDensity,
    relative_target,
    target_pdf_on_grid,
)
from app.exceptions import ConfigError, GridError
from app.flow.base import BaseFlow
from app.logger import logger
from app.matching.base import EvaluationRecord
from app.matching.monotonic import SurrogateStates, fit_surrogate
from app.models.base import UncertainModel
from app.quadrature import DensityVector, QuadratureGrid, auto_bounds, make_grid
from app.schema import RunTrace, StateBatch


def target_density(settings: TargetSettings) -> Optional[TargetDensity]:
    """Closed-form target for the fixed families, None for the derived ones."""
    if isinstance(settings, GaussianTargetSettings):
        return GaussianTarget(mean=settings.mean, std=settings.std)
    if isinstance(settings, BetaTargetSettings):
        try:
            return BetaTarget(
                alpha=settings.alpha,
                beta_shape=settings.beta_shape,
                lower=settings.lower,
                upper=settings.upper,
            )
        except ValueError as e:
            raise ConfigError(f"target: {e}") from e
    return None


def exchange_curve(
    model: UncertainModel, s, u_values: Optional[np.ndarray] = None, n_points: int = 101
) -> List[Tuple[float, float, float]]:
    """Rows (u, q, a u + b): the qoi against the uncertainty next to its two-state line."""
    if u_values is None:
        u_values = np.linspace(model.u_lower, model.u_upper, n_points)
    q, _ = model.evaluate_many(s, u_values)
    first, second = model.evaluate(s, model.u_lower), model.evaluate(s, model.u_upper)
    surrogate = fit_surrogate(
        SurrogateStates(
            u1=first.u,
            u2=second.u,
            q1=first.q,
            q2=second.q,
            dq1_ds=first.dq_ds,
            dq2_ds=second.dq_ds,
        )
    )
    line = surrogate(u_values)
    return [(float(u), float(qi), float(li)) for u, qi, li in zip(u_values, q, line)]


class MatchingFlow(BaseFlow):
    """
    Density-matching optimization: one function call evaluates the model at
    the matcher's uncertainty states, assembles the distance to the target
    and its design gradient, and hands both to the optimizer.

    `prepare` evaluates the initial design once, resolves the quadrature grid
    and the target from it, and the first function call reuses those states.
    """

    target: Optional[TargetSettings] = Field(None, description="Target pdf settings")
    n_points: int = Field(2000, ge=2, description="Quadrature nodes")
    bounds: Union[Literal["auto"], Tuple[float, float]] = Field(
        "auto", description="Grid bounds or auto"
    )
    padding: float = Field(0.1, ge=0, description="Auto-bounds padding fraction")

    _grid: Optional[QuadratureGrid] = PrivateAttr(default=None)
    _target: Optional[DensityVector] = PrivateAttr(default=None)
    _initial: Optional[Tuple[np.ndarray, StateBatch]] = PrivateAttr(default=None)
    _pending: Optional[Tuple[np.ndarray, StateBatch]] = PrivateAttr(default=None)
    _function_calls: int = PrivateAttr(default=0)
    _model_evaluations: int = PrivateAttr(default=0)

    @property
    def grid(self) -> QuadratureGrid:
        if self._grid is None:
            raise GridError("the flow has not been prepared: no quadrature grid yet")
        return self._grid

    @property
    def target_vector(self) -> DensityVector:
        if self._target is None:
            raise GridError("the flow has not been prepared: no target yet")
        return self._target

    @property
    def function_calls(self) -> int:
        return self._function_calls

    @property
    def model_evaluations(self) -> int:
        return self._model_evaluations

    @property
    def initial_states(self) -> StateBatch:
        if self._initial is None:
            raise GridError("the flow has not been prepared")
        return self._initial[1]

    async def prepare(self, s0, require_target: bool = True) -> QuadratureGrid:
        """Evaluate the initial design and resolve the grid and target around it."""
        s0 = self.model.check_design(s0)
        states = await self.matcher.evaluate_async(self.model, s0)
        self._model_evaluations += states.size
        self.matcher.prepare(states)
        self._initial = (s0.copy(), states)
        self._pending = self._initial

        if self.target is None and require_target:
            raise ConfigError("target: a target pdf is required")

        design_states = None
        if isinstance(self.target, DesignTargetSettings):
            # evaluated outside the call budget
            design_states = self.matcher.evaluate(self.model, self.target.design)

        self._grid = self._resolve_grid(states, design_states)
        logger.debug(
            f"Quadrature grid [{self._grid.f_lower:.6g}, {self._grid.f_upper:.6g}] "
            f"with {self._grid.n_points} nodes"
        )
        if self.target is not None:
            self._target = self._resolve_target(states, design_states)
        return self._grid

    def _target_interval(
        self, states: StateBatch, design_states: Optional[StateBatch]
    ) -> Optional[Tuple[float, float]]:
        settings = self.target
        if settings is None:
            return None
        closed_form = target_density(settings)
        if closed_form is not None:
            return closed_form.effective_support()
        if isinstance(settings, RelativeTargetSettings):
            mean, variance = self.matcher.qoi_moments(states)
            std = settings.std_ratio * np.sqrt(variance)
            center = mean + settings.mean_shift
            return center - 6 * std, center + 6 * std
        return self.matcher.qoi_range(design_states)

    def _resolve_grid(
        self, states: StateBatch, design_states: Optional[StateBatch]
    ) -> QuadratureGrid:
        if self.bounds != "auto":
            return make_grid(self.bounds[0], self.bounds[1], self.n_points)
        intervals = [self.matcher.qoi_range(states)]
        target_interval = self._target_interval(states, design_states)
        if target_interval is not None:
            intervals.append(target_interval)
        lower, upper = auto_bounds(*intervals, padding=self.padding)
        return make_grid(lower, upper, self.n_points)

    def _resolve_target(
        self, states: StateBatch, design_states: Optional[StateBatch]
    ) -> DensityVector:
        settings = self.target
        grid = self.grid
        closed_form = target_density(settings)
        if closed_form is None and isinstance(settings, RelativeTargetSettings):
            reference = self.matcher.density(states, grid)
            closed_form = relative_target(
                reference, mean_shift=settings.mean_shift, std_ratio=settings.std_ratio
            )
            logger.info(
                f"Relative target: mean={closed_form.mean:.6g}, std={closed_form.std:.6g}"
            )
        if closed_form is not None:
            return target_pdf_on_grid(closed_form, grid, renormalize=settings.renormalize)

        density = self.matcher.density(design_states, grid)
        if settings.renormalize:
            mass = density.integral()
            if mass <= 0:
                raise GridError("design target has no mass on the quadrature grid")
            density = DensityVector(grid=grid, values=density.values / mass)
        return density

    async def objective_eval(self, s) -> EvaluationRecord:
        """One function call: evaluate the states of s and assemble distance and gradient."""
        s = self.model.check_design(s)
        if self._pending is not None and np.array_equal(self._pending[0], s):
            states = self._pending[1]
        else:
            states = await self.matcher.evaluate_async(self.model, s)
            self._model_evaluations += states.size
        self._pending = None
        self._function_calls += 1
        return self.matcher.assemble(s, states, self.target_vector)

    def evaluate_design(self, s) -> EvaluationRecord:
        """Synchronous, uncounted evaluation used by finite-difference checks."""
        s = self.model.check_design(s)
        states = self.matcher.evaluate(self.model, s)
        return self.matcher.assemble(s, states, self.target_vector)

    def design_density(self, s) -> DensityVector:
        states = self.matcher.evaluate(self.model, self.model.check_design(s))
        return self.matcher.density(states, self.grid)

    def initial_density(self) -> DensityVector:
        return self.matcher.density(self.initial_states, self.grid)

    def exchange_curve(self, s, n_points: int = 101) -> List[Tuple[float, float, float]]:
        return exchange_curve(self.model, s, n_points=n_points)

    async def minimize(self, s0) -> RunTrace:
        if self._initial is None or not np.array_equal(
            self._initial[0], np.atleast_1d(np.asarray(s0, dtype=float))
        ):
            await self.prepare(s0)
        return await self.optimizer.minimize(self.objective_eval, s0, self.model.bounds)

    async def execute(self, s0) -> RunTrace:
        logger.info(
            f"Matching {self.model.name} with the {self.matcher.name} formulation "
            f"from s0={np.atleast_1d(s0).tolist()}"
        )
        return await self.minimize(s0)
