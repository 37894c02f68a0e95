from app.matching.base import BaseMatcher, EvaluationRecord
from app.matching.kde_matcher import KdeMatcher
from app.matching.matcher_factory import MatcherFactory
from app.matching.monotonic_matcher import MonotonicMatcher

__all__ = [
    "BaseMatcher",
    "EvaluationRecord",
    "KdeMatcher",
    "MatcherFactory",
    "MonotonicMatcher",
]
