from typing import Optional, Tuple

import numpy as np

from app.logger import logger
from app.optimizer.base import BaseOptimizer, Objective
from app.schema import OptimizerMethod, RunTrace, TerminationReason


class QuasiNewtonOptimizer(BaseOptimizer):
    """
    BFGS on the inverse Hessian with Armijo backtracking, or plain steepest
    descent. Bounds are handled by projecting trial points and masking the
    gradient components held at an active bound.
    """

    async def minimize(
        self,
        objective: Objective,
        s0,
        bounds: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ) -> RunTrace:
        cfg = self.config
        x = np.atleast_1d(np.asarray(s0, dtype=float))
        n = x.shape[0]
        if bounds is None:
            bounds = (np.full(n, -np.inf), np.full(n, np.inf))
        x = self.project(x, bounds)

        trace = RunTrace()
        current = await self.call(objective, x, trace)
        trace.records[-1].accepted = True
        inverse_hessian: Optional[np.ndarray] = None
        step_scale = cfg.initial_step

        while True:
            gradient = current.gradient
            free = self.free_mask(x, gradient, bounds)
            projected = np.where(free, gradient, 0.0)
            if np.linalg.norm(projected) < cfg.gradient_tolerance:
                trace.termination = TerminationReason.GRADIENT_TOLERANCE
                break
            if trace.function_calls >= cfg.max_function_calls:
                trace.termination = TerminationReason.BUDGET
                break

            direction = self._direction(projected, free, inverse_hessian, step_scale)
            if direction @ projected >= 0:
                inverse_hessian = None
                direction = self._direction(projected, free, None, step_scale)

            accepted, reason = None, None
            t = 1.0
            while True:
                candidate = self.project(x + t * direction, bounds)
                step = candidate - x
                if np.linalg.norm(step) < cfg.design_tolerance:
                    reason = TerminationReason.STEP_TOLERANCE
                    break
                if trace.function_calls >= cfg.max_function_calls:
                    reason = TerminationReason.BUDGET
                    break
                trial = await self.call(objective, candidate, trace)
                if trial.distance <= current.distance + cfg.sufficient_decrease * min(
                    gradient @ step, 0.0
                ):
                    trace.records[-1].accepted = True
                    accepted = trial
                    break
                t *= cfg.shrink

            if accepted is None:
                if reason == TerminationReason.STEP_TOLERANCE and t < 1.0:
                    logger.warning("Line search shrank below the design tolerance")
                    reason = TerminationReason.LINE_SEARCH_FAILED
                trace.termination = reason
                break

            inverse_hessian = self._update(
                inverse_hessian, step, accepted.gradient - gradient, free
            )
            step_scale = max(2.0 * np.linalg.norm(step), cfg.design_tolerance)
            x, current = candidate, accepted
            trace.iterations += 1

            if np.linalg.norm(step) < cfg.design_tolerance:
                trace.termination = TerminationReason.STEP_TOLERANCE
                break

        logger.info(
            f"Optimization finished after {trace.function_calls} function calls "
            f"({trace.iterations} iterations): {trace.termination.value}"
        )
        return trace

    def _direction(self, projected, free, inverse_hessian, step_scale) -> np.ndarray:
        if self.config.method == OptimizerMethod.BFGS and inverse_hessian is not None:
            direction = -inverse_hessian @ projected
            return np.where(free, direction, 0.0)
        return -projected * (step_scale / np.linalg.norm(projected))

    @staticmethod
    def _update(inverse_hessian, step, change, free) -> Optional[np.ndarray]:
        step = np.where(free, step, 0.0)
        change = np.where(free, change, 0.0)
        curvature = step @ change
        if curvature <= 1e-12 * np.linalg.norm(step) * np.linalg.norm(change):
            return inverse_hessian
        n = step.shape[0]
        if inverse_hessian is None:
            inverse_hessian = (curvature / (change @ change)) * np.eye(n)
        rho = 1.0 / curvature
        left = np.eye(n) - rho * np.outer(step, change)
        return left @ inverse_hessian @ left.T + rho * np.outer(step, step)
