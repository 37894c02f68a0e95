from typing import Any, Dict

from app.models.base import UncertainModel
from app.models.example import ExampleLinearModel
from app.models.fan import SyntheticFanModel
from app.schema import ModelType


class ModelFactory:
    """Factory for the shipped uncertain models"""

    @staticmethod
    def create_model(model_type: ModelType, **params: Any) -> UncertainModel:
        models: Dict[ModelType, type] = {
            ModelType.EXAMPLE: ExampleLinearModel,
            ModelType.FAN: SyntheticFanModel,
        }

        model_class = models.get(ModelType(model_type))
        if not model_class:
            raise ValueError(f"Unknown model type: {model_type}")

        return model_class(**params)


def example_model() -> ExampleLinearModel:
    return ExampleLinearModel()


def synthetic_fan_model(n_design: int = 4, seed: int = 0, **params: Any) -> SyntheticFanModel:
    return SyntheticFanModel(n_design=n_design, seed=seed, **params)
