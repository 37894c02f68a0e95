from app.models.base import UncertainModel
from app.models.example import ExampleLinearModel
from app.models.fan import SyntheticFanModel, fan_root_efficiency
from app.models.model_factory import ModelFactory, example_model, synthetic_fan_model

__all__ = [
    "UncertainModel",
    "ExampleLinearModel",
    "SyntheticFanModel",
    "ModelFactory",
    "example_model",
    "fan_root_efficiency",
    "synthetic_fan_model",
]
