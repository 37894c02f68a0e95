import numpy as np
import pytest

from app.exceptions import DomainError, ModelError
from app.matching import MonotonicMatcher
from app.models import (
    ExampleLinearModel,
    ModelFactory,
    SyntheticFanModel,
    example_model,
    fan_root_efficiency,
    synthetic_fan_model,
)
from app.oracle import finite_diff_jacobian, relative_error


class TestExampleLinearModel:

    def test_states_at_origin(self, example):
        assert example.evaluate([0.0], 0.1).q == pytest.approx(30.0)
        assert example.evaluate([0.0], 0.2).q == pytest.approx(50.0)
        assert example.evaluate([0.0], 0.13).q == pytest.approx(36.0)

    def test_adjoint_rows(self, example):
        np.testing.assert_allclose(example.evaluate([2.0], 0.1).dq_ds, [0.1])
        np.testing.assert_allclose(example.evaluate([2.0], 0.2).dq_ds, [-0.2])
        np.testing.assert_allclose(example.evaluate([2.0], 0.15).dq_ds, [-0.05])

    def test_design_moves_both_states(self, example):
        assert example.evaluate([5.0], 0.1).q == pytest.approx(30.5)
        assert example.evaluate([5.0], 0.2).q == pytest.approx(49.0)

    def test_evaluate_many_matches_single(self, example):
        us = np.array([0.1, 0.12, 0.2])
        q, dq_ds = example.evaluate_many([1.5], us)
        for j, u in enumerate(us):
            single = example.evaluate([1.5], u)
            assert q[j] == pytest.approx(single.q)
            np.testing.assert_allclose(dq_ds[j], single.dq_ds)

    def test_rejects_bad_inputs(self, example):
        with pytest.raises(ModelError):
            example.evaluate([0.0, 1.0], 0.15)
        with pytest.raises(DomainError):
            example.evaluate([0.0], 0.25)


class TestSyntheticFanModel:

    def test_root_efficiency_formula(self):
        expected = (1.5 ** (0.4 / 1.4) - 1) / 0.1365
        assert fan_root_efficiency(1.5, 1.1365) == pytest.approx(expected, rel=1e-14)
        assert 0.85 < expected < 0.95

    def test_root_efficiency_domain(self):
        with pytest.raises(DomainError):
            fan_root_efficiency(1.5, 1.0)
        with pytest.raises(DomainError):
            fan_root_efficiency(0.0, 1.2)

    def test_adjoint_matches_finite_differences(self, fan, rng):
        us = np.linspace(fan.u_lower, fan.u_upper, 7)
        for _ in range(5):
            s = rng.uniform(-0.9, 0.9, fan.n_design)
            _, jacobian = fan.evaluate_many(s, us)
            fd = finite_diff_jacobian(lambda x: fan.evaluate_many(x, us)[0], s)
            assert relative_error(jacobian, fd) <= 1e-6

    def test_monotone_decreasing_in_leakage(self, fan, rng):
        us = np.linspace(fan.u_lower, fan.u_upper, 50)
        for _ in range(20):
            s = rng.uniform(-1.0, 1.0, fan.n_design)
            q, _ = fan.evaluate_many(s, us)
            assert np.all(np.diff(q) < 0)

    def test_design_box_controls_leakage_slope(self, fan):
        assert fan.slope_reduction_ratio() <= 0.5
        assert fan.leakage_slope(np.zeros(fan.n_design)) < 0

    def test_coefficients_are_seeded(self):
        a = SyntheticFanModel(n_design=3, seed=7).coefficients
        b = SyntheticFanModel(n_design=3, seed=7).coefficients
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
        _, _, d, _ = a
        assert np.abs(d).sum() == pytest.approx(1.2)

    def test_weak_slope_authority_is_rejected(self):
        with pytest.raises(ModelError):
            SyntheticFanModel(slope_authority=0.1)

    def test_default_box(self):
        model = SyntheticFanModel(n_design=2)
        lower, upper = model.bounds
        np.testing.assert_array_equal(lower, [-1.0, -1.0])
        np.testing.assert_array_equal(upper, [1.0, 1.0])

    def test_design_outside_box(self, fan):
        with pytest.raises(DomainError):
            fan.evaluate([1.5, 0.0, 0.0, 0.0], fan.u_lower)


class TestModelFactory:

    def test_creates_each_model(self):
        assert isinstance(ModelFactory.create_model("example"), ExampleLinearModel)
        fan = ModelFactory.create_model("fan", n_design=3, seed=2)
        assert isinstance(fan, SyntheticFanModel)
        assert fan.n_design == 3

    def test_example_model_states(self):
        model = example_model()
        assert isinstance(model, ExampleLinearModel)
        state = model.evaluate([0.0], 0.1)
        assert state.q == pytest.approx(30.0)
        np.testing.assert_allclose(state.dq_ds, [0.1])
        assert model.evaluate([0.0], 0.15).q == pytest.approx(40.0)

    def test_synthetic_fan_model_defaults(self):
        model = synthetic_fan_model()
        assert isinstance(model, SyntheticFanModel)
        assert model.n_design == 4
        seeded = synthetic_fan_model(n_design=4, seed=0)
        for x, y in zip(model.coefficients, seeded.coefficients):
            np.testing.assert_array_equal(x, y)
        assert synthetic_fan_model(n_design=2, seed=5).n_design == 2

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            ModelFactory.create_model("turbine")


class TestStateEvaluation:

    @pytest.mark.asyncio
    async def test_concurrent_states_keep_order(self, fan, fan_pdf):
        matcher = MonotonicMatcher(uncertainty=fan_pdf)
        s = [0.3, -0.1, 0.0, 0.5]
        sync = matcher.evaluate(fan, s)
        concurrent = await matcher.evaluate_async(fan, s)
        np.testing.assert_array_equal(concurrent.u, [fan_pdf.lower, fan_pdf.upper])
        np.testing.assert_array_equal(sync.q, concurrent.q)
        np.testing.assert_array_equal(sync.dq_ds, concurrent.dq_ds)
