import numpy as np
import pytest

from app.exceptions import GridError
from app.quadrature import (
    DensityVector,
    auto_bounds,
    distance,
    format_float,
    make_grid,
    write_density_csv,
    write_rows_csv,
)


class TestQuadratureGrid:
    def test_two_point_weights(self):
        grid = make_grid(0.0, 1.0, 2)
        np.testing.assert_array_equal(grid.weights, [0.5, 0.5])

    def test_trapezoid_weights(self):
        grid = make_grid(0.0, 2.0, 5)
        np.testing.assert_allclose(grid.weights, [0.25, 0.5, 0.5, 0.5, 0.25])
        assert grid.weights.sum() == pytest.approx(2.0)

    def test_last_node_is_upper_bound(self):
        grid = make_grid(28.0, 52.0, 2000)
        assert grid.nodes[0] == 28.0
        assert grid.nodes[-1] == 52.0
        assert grid.nodes.shape == (2000,)

    def test_nodes_are_read_only(self):
        grid = make_grid(0.0, 1.0, 11)
        with pytest.raises(ValueError):
            grid.nodes[0] = 5.0

    @pytest.mark.parametrize(
        "lower, upper, n",
        [(1.0, 1.0, 10), (2.0, 1.0, 10), (0.0, 1.0, 1), (0.0, np.inf, 10)],
    )
    def test_invalid_grids(self, lower, upper, n):
        with pytest.raises(GridError):
            make_grid(lower, upper, n)

    def test_integrates_polynomials(self):
        grid = make_grid(0.0, 1.0, 1001)
        assert grid.integrate(np.ones(1001)) == pytest.approx(1.0, abs=1e-14)
        assert grid.integrate(grid.nodes) == pytest.approx(0.5, abs=1e-14)


class TestDensityVector:
    def test_rejects_negative_values(self):
        grid = make_grid(0.0, 1.0, 3)
        with pytest.raises(ValueError):
            DensityVector(grid=grid, values=[1.0, -0.1, 1.0])

    def test_rejects_wrong_length(self):
        grid = make_grid(0.0, 1.0, 3)
        with pytest.raises(ValueError):
            DensityVector(grid=grid, values=[1.0, 1.0])

    def test_uniform_moments(self):
        grid = make_grid(0.0, 1.0, 1001)
        mean, variance = DensityVector(grid=grid, values=np.ones(1001)).moments()
        assert mean == pytest.approx(0.5, abs=1e-12)
        assert variance == pytest.approx(1 / 12, abs=1e-6)

    def test_moments_need_mass(self):
        grid = make_grid(0.0, 1.0, 5)
        with pytest.raises(GridError):
            DensityVector(grid=grid, values=np.zeros(5)).moments()


class TestDistance:
    def test_identical_vectors(self):
        grid = make_grid(0.0, 1.0, 101)
        v = DensityVector(grid=grid, values=np.linspace(0, 2, 101))
        assert distance(v, v) == 0.0

    def test_constant_offset(self):
        grid = make_grid(0.0, 2.0, 101)
        t = DensityVector(grid=grid, values=np.full(101, 1.0))
        r = DensityVector(grid=grid, values=np.full(101, 0.5))
        assert distance(t, r) == pytest.approx(0.5)

    def test_symmetric(self, rng):
        grid = make_grid(-3.0, 3.0, 301)
        t = DensityVector(grid=grid, values=rng.uniform(0.0, 1.0, 301))
        r = DensityVector(grid=grid, values=rng.uniform(0.0, 1.0, 301))
        assert distance(t, r) == distance(r, t)

    def test_shifted_gaussians_match_riemann_sum(self):
        def normal(x, mean):
            return np.exp(-0.5 * (x - mean) ** 2) / np.sqrt(2.0 * np.pi)

        grid = make_grid(-8.0, 8.0, 2000)
        t = DensityVector(grid=grid, values=normal(grid.nodes, 0.0))
        r = DensityVector(grid=grid, values=normal(grid.nodes, 0.1))

        n, width = 10_000_000, 16.0
        dx = width / n
        total = 0.0
        for start in range(0, n, 1_000_000):
            x = -8.0 + (np.arange(start, start + 1_000_000) + 0.5) * dx
            total += float(np.sum((normal(x, 0.0) - normal(x, 0.1)) ** 2)) * dx
        assert distance(t, r) == pytest.approx(total, rel=1e-6)

    def test_mismatched_grids(self):
        a = DensityVector(grid=make_grid(0.0, 1.0, 11), values=np.ones(11))
        b = DensityVector(grid=make_grid(0.0, 2.0, 11), values=np.ones(11))
        with pytest.raises(GridError):
            distance(a, b)


class TestAutoBounds:
    def test_single_interval_padding(self):
        assert auto_bounds((30.0, 50.0)) == pytest.approx((28.0, 52.0))

    def test_union_of_intervals(self):
        assert auto_bounds((30.0, 50.0), (45.0, 60.0), padding=0.0) == (30.0, 60.0)

    def test_unordered_interval(self):
        assert auto_bounds((50.0, 30.0), padding=0.0) == (30.0, 50.0)

    def test_requires_an_interval(self):
        with pytest.raises(GridError):
            auto_bounds()

    def test_collapsed(self):
        with pytest.raises(GridError):
            auto_bounds((1.0, 1.0))


class TestCsvOutput:
    def test_seventeen_significant_digits(self):
        assert format_float(0.1) == "0.10000000000000001"
        assert float(format_float(1 / 3)) == 1 / 3

    def test_density_csv(self, tmp_path):
        grid = make_grid(0.0, 1.0, 3)
        path = write_density_csv(
            tmp_path / "out" / "pdf.csv", DensityVector(grid=grid, values=[0.0, 2.0, 0.0])
        )
        lines = path.read_text().splitlines()
        assert lines[0] == "node,value"
        assert lines[2] == "0.5,2"
        assert len(lines) == 4

    def test_rows_csv_keeps_integers(self, tmp_path):
        path = write_rows_csv(tmp_path / "rows.csv", ["call", "x"], [(1, 0.25)])
        assert path.read_text().splitlines() == ["call,x", "1,0.25"]
