from typing import Any, Dict

from app.densities import ScaledBeta
from app.matching.base import BaseMatcher
from app.matching.kde_matcher import KdeMatcher
from app.matching.monotonic_matcher import MonotonicMatcher
from app.schema import MatcherType


class MatcherFactory:
    """Factory for density-matching formulations"""

    @staticmethod
    def create_matcher(
        matcher_type: MatcherType, uncertainty: ScaledBeta, **kwargs: Any
    ) -> BaseMatcher:
        matchers: Dict[MatcherType, type] = {
            MatcherType.MONOTONIC: MonotonicMatcher,
            MatcherType.KDE: KdeMatcher,
        }

        matcher_class = matchers.get(MatcherType(matcher_type))
        if not matcher_class:
            raise ValueError(f"Unknown matcher type: {matcher_type}")

        return matcher_class(uncertainty=uncertainty, **kwargs)
