import numpy as np
import pytest

from app.config import parse_run_config
from app.exceptions import ConfigError
from app.flow import FlowFactory, FlowType, MatchingFlow, build_matching_flow
from app.schema import TerminationReason


def example_config(**sections):
    raw = {
        "model": {"name": "example", "design": [0.0]},
        "uncertainty": {"alpha": 1.7, "beta_shape": 3.2},
        "target": {"family": "gaussian", "mean": 37.0, "std": 1.0},
    }
    raw.update(sections)
    return parse_run_config(raw)


def fan_config(**sections):
    raw = {
        "model": {"name": "fan", "design": [0.0, 0.0, 0.0, 0.0], "seed": 0},
        "uncertainty": {"alpha": 1.7, "beta_shape": 2.8},
        "target": {"family": "relative", "mean_shift": 0.0, "std_ratio": 0.6},
    }
    raw.update(sections)
    return parse_run_config(raw)


class TestBuildMatchingFlow:

    def test_from_config(self):
        flow = FlowFactory.create_flow(FlowType.MATCHING, example_config())
        assert isinstance(flow, MatchingFlow)
        assert flow.matcher.name == "monotonic"
        assert flow.matcher.uncertainty.lower == 0.1
        assert flow.matcher.uncertainty.upper == 0.2
        assert flow.n_points == 2000

    def test_kde_sample_seed_defaults_to_run_seed(self):
        flow = build_matching_flow(
            example_config(seed=11, matcher={"kind": "kde", "n_samples": 50})
        )
        assert flow.matcher.sample_seed == 11
        assert flow.matcher.n_samples == 50

    def test_uncertainty_outside_model_range(self):
        config = example_config(
            uncertainty={"alpha": 1.7, "beta_shape": 3.2, "lower": 0.05, "upper": 0.2}
        )
        with pytest.raises(ConfigError, match="uncertainty"):
            build_matching_flow(config)

    def test_invalid_beta_shape(self):
        config = example_config(uncertainty={"alpha": -1.0, "beta_shape": 3.2})
        with pytest.raises(ConfigError, match="uncertainty"):
            build_matching_flow(config)


class TestMatchingFlow:

    @pytest.mark.asyncio
    async def test_auto_grid_covers_image_and_target(self):
        flow = build_matching_flow(example_config())
        grid = await flow.prepare([0.0])
        assert grid.f_lower == pytest.approx(28.0)
        assert grid.f_upper == pytest.approx(52.0)
        assert flow.target_vector.integral() == pytest.approx(1.0)
        assert flow.model_evaluations == 2

    @pytest.mark.asyncio
    async def test_explicit_bounds(self):
        flow = build_matching_flow(
            example_config(grid={"bounds": [25.0, 55.0], "n_points": 301})
        )
        grid = await flow.prepare([0.0])
        assert (grid.f_lower, grid.f_upper, grid.n_points) == (25.0, 55.0, 301)

    @pytest.mark.asyncio
    async def test_target_required_for_matching(self):
        flow = build_matching_flow(example_config(target=None))
        with pytest.raises(ConfigError, match="target"):
            await flow.prepare([0.0])
        grid = await flow.prepare([0.0], require_target=False)
        assert grid.f_lower == pytest.approx(28.0)

    @pytest.mark.asyncio
    async def test_recovers_known_design(self):
        flow = build_matching_flow(
            example_config(target={"family": "design", "design": [5.0]})
        )
        trace = await flow.execute([0.0])
        best = trace.best
        assert trace.function_calls <= 40
        assert best.s[0] == pytest.approx(5.0, abs=1e-3)
        assert best.normalized_distance <= 1e-6
        assert best.slope == pytest.approx(185.0, abs=0.1)
        assert best.shift == pytest.approx(12.0, abs=0.1)

    @pytest.mark.asyncio
    async def test_counts_two_evaluations_per_call(self):
        flow = build_matching_flow(
            example_config(target={"family": "design", "design": [5.0]})
        )
        trace = await flow.execute([0.0])
        assert flow.function_calls == trace.function_calls
        assert flow.model_evaluations == 2 * trace.function_calls
        assert trace.model_evaluations == 2 * trace.function_calls

    @pytest.mark.asyncio
    async def test_self_target_is_already_optimal(self):
        flow = build_matching_flow(
            example_config(target={"family": "design", "design": [0.0]})
        )
        trace = await flow.execute([0.0])
        assert trace.function_calls == 1
        assert trace.records[0].distance == 0.0
        assert trace.termination == TerminationReason.GRADIENT_TOLERANCE

    @pytest.mark.asyncio
    async def test_budget_of_one_call(self):
        flow = build_matching_flow(example_config(optimizer={"max_function_calls": 1}))
        trace = await flow.execute([0.0])
        assert trace.function_calls == 1
        assert flow.model_evaluations == 2

    @pytest.mark.asyncio
    async def test_evaluate_design_is_uncounted(self):
        flow = build_matching_flow(example_config())
        await flow.prepare([0.0])
        counted = await flow.objective_eval([1.0])
        calls, evaluations = flow.function_calls, flow.model_evaluations
        uncounted = flow.evaluate_design([1.0])
        assert uncounted.distance == pytest.approx(counted.distance, rel=1e-12)
        np.testing.assert_allclose(uncounted.gradient, counted.gradient, rtol=1e-12)
        assert (flow.function_calls, flow.model_evaluations) == (calls, evaluations)

    @pytest.mark.asyncio
    async def test_fan_variance_reduction(self):
        flow = build_matching_flow(fan_config())
        trace = await flow.execute([0.0, 0.0, 0.0, 0.0])
        first, best = trace.records[0], trace.best
        assert best.distance < 0.5 * first.distance
        assert best.variance < 0.9 * first.variance
        lower, upper = flow.model.bounds
        assert np.all(np.asarray(best.s) >= lower)
        assert np.all(np.asarray(best.s) <= upper)

    @pytest.mark.asyncio
    async def test_kde_counts_samples_per_call(self):
        flow = build_matching_flow(
            example_config(
                matcher={"kind": "kde", "n_samples": 200},
                optimizer={"max_function_calls": 3},
            )
        )
        trace = await flow.execute([0.0])
        assert flow.model_evaluations == 200 * trace.function_calls
        assert flow.matcher.bandwidth is not None


class TestExchangeCurve:

    def test_linear_model_lies_on_its_line(self):
        flow = build_matching_flow(example_config())
        rows = flow.exchange_curve([2.0], n_points=11)
        assert len(rows) == 11
        for u, q, line in rows:
            assert q == pytest.approx(line, abs=1e-10)

    def test_fan_curve_meets_line_at_the_states(self):
        flow = build_matching_flow(fan_config())
        rows = flow.exchange_curve([0.1, 0.2, -0.3, 0.0], n_points=21)
        (u0, q0, l0), (u1, q1, l1) = rows[0], rows[-1]
        assert u0 == flow.model.u_lower and u1 == flow.model.u_upper
        assert q0 == pytest.approx(l0, rel=1e-12)
        assert q1 == pytest.approx(l1, rel=1e-12)
        assert all(b[1] < a[1] for a, b in zip(rows, rows[1:]))
