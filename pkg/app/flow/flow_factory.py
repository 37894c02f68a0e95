from enum import Enum
from typing import Any

from app.config import RunConfig
from app.densities import ScaledBeta
from app.exceptions import ConfigError
from app.flow.base import BaseFlow
from app.flow.matching import MatchingFlow
from app.matching.kde import KdeConfig
from app.matching.matcher_factory import MatcherFactory
from app.models.model_factory import ModelFactory
from app.optimizer.base import OptimizerConfig
from app.optimizer.quasi_newton import QuasiNewtonOptimizer
from app.schema import MatcherType


class FlowType(str, Enum):
    MATCHING = "matching"


class FlowFactory:
    """Factory for creating workflows from a run configuration"""

    @staticmethod
    def create_flow(
        flow_type: FlowType, config: RunConfig, **kwargs: Any
    ) -> BaseFlow:
        flows = {
            FlowType.MATCHING: build_matching_flow,
        }

        builder = flows.get(FlowType(flow_type))
        if not builder:
            raise ValueError(f"Unknown flow type: {flow_type}")

        return builder(config, **kwargs)


def build_matching_flow(config: RunConfig) -> MatchingFlow:
    try:
        model = ModelFactory.create_model(config.model.name, **config.model.params())
    except ValueError as e:
        raise ConfigError(f"model: {e}") from e

    unc = config.uncertainty
    try:
        uncertainty = ScaledBeta(
            alpha=unc.alpha,
            beta_shape=unc.beta_shape,
            lower=model.u_lower if unc.lower is None else unc.lower,
            upper=model.u_upper if unc.upper is None else unc.upper,
        )
    except ValueError as e:
        raise ConfigError(f"uncertainty: {e}") from e
    if uncertainty.lower < model.u_lower or uncertainty.upper > model.u_upper:
        raise ConfigError(
            f"uncertainty: support [{uncertainty.lower}, {uncertainty.upper}] exceeds "
            f"the model range [{model.u_lower}, {model.u_upper}]"
        )

    kind = MatcherType(config.matcher.kind)
    if kind == MatcherType.KDE:
        matcher = MatcherFactory.create_matcher(
            kind,
            uncertainty,
            n_samples=config.matcher.n_samples,
            sample_seed=(
                config.seed
                if config.matcher.sample_seed is None
                else config.matcher.sample_seed
            ),
            kde=KdeConfig(bandwidth=config.matcher.bandwidth),
        )
    else:
        matcher = MatcherFactory.create_matcher(
            kind, uncertainty, uncorrected_shift=config.matcher.uncorrected_shift
        )

    optimizer = QuasiNewtonOptimizer(
        config=OptimizerConfig(**config.optimizer.model_dump())
    )
    return MatchingFlow(
        model=model,
        matcher=matcher,
        optimizer=optimizer,
        target=config.target,
        n_points=config.grid.n_points,
        bounds=config.grid.bounds,
        padding=config.grid.padding,
    )
