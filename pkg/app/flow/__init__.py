from app.flow.base import BaseFlow
from app.flow.flow_factory import FlowFactory, FlowType, build_matching_flow
from app.flow.matching import MatchingFlow, exchange_curve, target_density


__all__ = [
    "BaseFlow",
    "FlowFactory",
    "FlowType",
    "MatchingFlow",
    "build_matching_flow",
    "exchange_curve",
    "target_density",
]
