import json
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.config import VerifySettings
from app.exceptions import DensityMatchError, VerificationError
from app.flow.matching import MatchingFlow
from app.logger import logger
from app.matching.kde import KdeConfig
from app.matching.kde_matcher import KdeMatcher
from app.matching.monotonic import SensitivityMatrix, pdf_sensitivity
from app.matching.monotonic_matcher import MonotonicMatcher
from app.oracle import (
    finite_diff_gradient,
    finite_diff_jacobian,
    histogram_density,
    mc_propagate,
    mc_surrogate,
    reference_distance,
    refined_error,
    relative_error,
    self_noise,
)

# the two-state line must pass through both states to this relative accuracy
STATE_TOLERANCE = 1e-10
NORMALIZATION_TOLERANCE = 1e-3
QUADRATURE_MOMENT_TOLERANCE = 1e-3
# interior nodes skipped at each image end in the D check
SENSITIVITY_MARGIN = 2


class CheckResult(BaseModel):
    """Outcome of one verification check."""

    name: str = Field(..., description="Check identifier")
    passed: bool = Field(..., description="Whether the check passed")
    value: Optional[float] = Field(None, description="Measured error or statistic")
    tolerance: Optional[float] = Field(None, description="Threshold the value is held to")
    detail: str = Field("", description="Human-readable context")


class VerifyReport(BaseModel):
    s: List[float] = Field(..., description="Design the checks ran at")
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def payload(self) -> dict:
        return {"passed": self.passed, **self.model_dump(mode="json")}

    def to_json(self) -> str:
        return json.dumps(self.payload(), indent=2, sort_keys=True)


def bounded_check(
    name: str, value: float, tolerance: float, detail: str = ""
) -> CheckResult:
    """Pass when a finite value is at most the tolerance."""
    value = float(value)
    if not np.isfinite(value):
        return CheckResult(
            name=name, passed=False, tolerance=tolerance, detail=f"non-finite: {detail}"
        )
    return CheckResult(
        name=name,
        passed=bool(value <= tolerance),
        value=value,
        tolerance=tolerance,
        detail=detail,
    )


class Verifier(BaseModel):
    """
    Runs the oracle suite against a prepared matching flow: surrogate
    consistency, normalization, D against finite differences, the distance
    gradient against an independent reference, Monte-Carlo moments,
    quadrature moments, the histogram comparison and the KDE gradient.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    flow: MatchingFlow
    settings: VerifySettings = Field(default_factory=VerifySettings)
    seed: int = 0

    @property
    def monotonic(self) -> MonotonicMatcher:
        matcher = self.flow.matcher
        if isinstance(matcher, MonotonicMatcher):
            return matcher
        return MonotonicMatcher(uncertainty=matcher.uncertainty)

    def kde_matcher(self) -> KdeMatcher:
        matcher = self.flow.matcher
        if isinstance(matcher, KdeMatcher):
            return matcher
        return KdeMatcher(
            uncertainty=matcher.uncertainty,
            n_samples=self.settings.kde_samples,
            sample_seed=self.seed,
            kde=KdeConfig(),
        )

    async def run(self, s) -> VerifyReport:
        s = self.flow.model.check_design(s)
        await self.flow.prepare(s)
        report = VerifyReport(s=s.tolist())
        checks: List[Callable[[np.ndarray], List[CheckResult]]] = [
            self.check_surrogate,
            self.check_normalization,
            self.check_sensitivity,
            self.check_gradient,
            self.check_mc_moments,
            self.check_quadrature_moments,
            self.check_histogram,
            self.check_kde_gradient,
        ]
        for check in checks:
            name = check.__name__.removeprefix("check_")
            try:
                results = check(s)
            except DensityMatchError as e:
                logger.error(f"Check {name} could not run: {e}")
                results = [CheckResult(name=name, passed=False, detail=str(e))]
            for result in results:
                level = "INFO" if result.passed else "WARNING"
                logger.log(
                    level,
                    f"{result.name}: {'pass' if result.passed else 'FAIL'} "
                    f"(value={result.value}, tolerance={result.tolerance})",
                )
            report.checks.extend(results)
        return report

    def sensitivity(self, s) -> SensitivityMatrix:
        matcher = self.monotonic
        states = matcher.evaluate(self.flow.model, s)
        return pdf_sensitivity(
            matcher.surrogate(states), matcher.uncertainty, self.flow.grid
        )

    def check_surrogate(self, s) -> List[CheckResult]:
        matcher = self.monotonic
        states = matcher.evaluate(self.flow.model, s)
        sur = matcher.surrogate(states)
        error = np.max(
            np.abs(sur(states.u) - states.q) / np.maximum(np.abs(states.q), 1.0)
        )
        return [
            bounded_check(
                "surrogate_reproduces_states",
                error,
                STATE_TOLERANCE,
                f"a={sur.a!r}, b={sur.b!r}",
            )
        ]

    def check_normalization(self, s) -> List[CheckResult]:
        matcher = self.monotonic
        r = matcher.density(matcher.evaluate(self.flow.model, s), self.flow.grid)
        integral = r.integral()
        return [
            bounded_check(
                "derived_pdf_normalization",
                abs(integral - 1.0),
                NORMALIZATION_TOLERANCE,
                f"integral={integral!r}",
            )
        ]

    def check_sensitivity(self, s) -> List[CheckResult]:
        matcher = self.monotonic
        model, grid = self.flow.model, self.flow.grid
        states = matcher.evaluate(model, s)
        sur = matcher.surrogate(states)
        analytic = self.sensitivity(s).entries

        v = (grid.nodes - sur.b) / sur.a
        interior = np.flatnonzero(
            (v > matcher.uncertainty.lower) & (v < matcher.uncertainty.upper)
        )
        if interior.size <= 2 * SENSITIVITY_MARGIN:
            raise VerificationError("too few grid nodes inside the surrogate image")
        nodes = np.sort(interior)[SENSITIVITY_MARGIN:-SENSITIVITY_MARGIN]

        def pdf_at_nodes(x):
            return matcher.density(matcher.evaluate(model, x), grid).values[nodes]

        error, _ = refined_error(
            analytic[nodes].ravel(),
            lambda step: finite_diff_jacobian(pdf_at_nodes, s, step).ravel(),
            s,
        )
        return [
            bounded_check(
                "sensitivity_fd",
                error,
                self.settings.fd_tolerance,
                f"{nodes.size} interior nodes, {s.shape[0]} design variables",
            )
        ]

    def check_gradient(self, s) -> List[CheckResult]:
        matcher = self.monotonic
        model, target = self.flow.model, self.flow.target_vector
        record = matcher.assemble(s, matcher.evaluate(model, s), target)

        def objective(x):
            return reference_distance(model, x, matcher.uncertainty, target)

        error, reference = refined_error(
            record.gradient,
            lambda step: finite_diff_gradient(objective, s, step),
            s,
        )
        return [
            bounded_check(
                "gradient_fd",
                error,
                self.settings.fd_tolerance,
                f"analytic={record.gradient.tolist()}, reference={reference.tolist()}",
            )
        ]

    def check_mc_moments(self, s) -> List[CheckResult]:
        matcher = self.monotonic
        states = matcher.evaluate(self.flow.model, s)
        sur = matcher.surrogate(states)
        mean, variance = matcher.qoi_moments(states)
        n = self.settings.mc_samples
        samples = mc_surrogate(sur.a, sur.b, matcher.uncertainty, n, self.seed)

        sample_mean = samples.mean()
        sample_var = samples.var(ddof=1)
        centered = samples - sample_mean
        mean_se = np.sqrt(sample_var / n)
        var_se = np.sqrt(max(np.mean(centered**4) - sample_var**2, 0.0) / n)
        return [
            CheckResult(
                name="mc_mean",
                passed=bool(abs(sample_mean - mean) <= 3 * mean_se),
                value=float(abs(sample_mean - mean)),
                tolerance=float(3 * mean_se),
                detail=f"sample={sample_mean!r}, exact={mean!r}",
            ),
            CheckResult(
                name="mc_variance",
                passed=bool(abs(sample_var - variance) <= 3 * var_se),
                value=float(abs(sample_var - variance)),
                tolerance=float(3 * var_se),
                detail=f"sample={sample_var!r}, exact={variance!r}",
            ),
        ]

    def check_quadrature_moments(self, s) -> List[CheckResult]:
        matcher = self.monotonic
        states = matcher.evaluate(self.flow.model, s)
        mean, variance = matcher.qoi_moments(states)
        q_mean, q_var = matcher.density(states, self.flow.grid).moments()
        return [
            bounded_check(
                "quadrature_mean",
                abs(q_mean - mean) / max(abs(mean), 1e-300),
                QUADRATURE_MOMENT_TOLERANCE,
                f"quadrature={q_mean!r}, exact={mean!r}",
            ),
            bounded_check(
                "quadrature_variance",
                abs(q_var - variance) / max(variance, 1e-300),
                QUADRATURE_MOMENT_TOLERANCE,
                f"quadrature={q_var!r}, exact={variance!r}",
            ),
        ]

    def check_histogram(self, s) -> List[CheckResult]:
        matcher = self.monotonic
        p = matcher.uncertainty
        sur = matcher.surrogate(matcher.evaluate(self.flow.model, s))
        n = self.settings.mc_samples
        histogram, noise = self_noise(
            mc_surrogate(sur.a, sur.b, p, n, self.seed),
            mc_surrogate(sur.a, sur.b, p, n, self.seed + 1),
            self.settings.histogram_bins,
        )
        values = np.asarray(p.pdf((histogram.centers - sur.b) / sur.a)) / abs(sur.a)
        l2 = histogram.l2_distance(values)
        return [
            bounded_check(
                "histogram_vs_derived_pdf",
                l2,
                3.0 * noise,
                f"{histogram.n_bins} bins, self-noise={noise!r}",
            )
        ]

    def check_kde_gradient(self, s) -> List[CheckResult]:
        matcher = self.kde_matcher()
        model, target = self.flow.model, self.flow.target_vector
        matcher.prepare(matcher.evaluate(model, s))
        record = matcher.assemble(s, matcher.evaluate(model, s), target)
        reference = finite_diff_gradient(
            lambda x: matcher.assemble(x, matcher.evaluate(model, x), target).distance,
            s,
        )
        error = relative_error(record.gradient, reference)
        return [
            bounded_check(
                "kde_gradient_fd",
                error,
                self.settings.kde_fd_tolerance,
                f"M={matcher.n_samples}, h={matcher.bandwidth!r}",
            )
        ]


def histogram_of_model(flow: MatchingFlow, s, n_samples: int, n_bins: int, seed: int):
    """Histogram of the model's own qoi under the input pdf."""
    samples = mc_propagate(flow.model, s, flow.matcher.uncertainty, n_samples, seed)
    return histogram_density(samples, n_bins)
