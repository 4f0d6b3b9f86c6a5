"""
Testes da regressão univariada (local-linear e spline penalizada).
"""
import numpy as np
import pytest

from src.errors import DegenerateError
from src.models import SmootherBackend, SmootherConfig
from src.smoother import GRID_SIZE, LINEAR_PENALTY, fit, predict, select_tuning, tuning_grid

LOCAL = SmootherConfig()
SPLINE = SmootherConfig(backend=SmootherBackend.SPLINE)


class TestFit:
    def test_reproduces_linear_data(self):
        x = np.linspace(-1, 1, 50)
        f = fit(x, 2 * x, LOCAL)
        t = np.linspace(-1, 1, 37)
        assert np.allclose(predict(f, t), 2 * t, atol=1e-6)

    def test_training_point_is_exact(self):
        x = np.linspace(0, 3, 20)
        y = 1.5 - 0.5 * x
        f = fit(x, y, LOCAL)
        assert predict(f, x[7:8])[0] == pytest.approx(y[7], abs=1e-9)

    @pytest.mark.parametrize("cfg", [LOCAL, SPLINE])
    def test_constant_response(self, cfg):
        rng = np.random.default_rng(1)
        x = rng.normal(size=60)
        f = fit(x, np.full(60, 4.2), cfg)
        t = np.array([-10.0, -1.0, 0.0, 0.3, 2.5, 10.0])
        assert np.allclose(predict(f, t), 4.2, atol=1e-8)

    def test_cubic_truth(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-2, 2, size=2000)
        y = x ** 3 + rng.normal(scale=0.1, size=2000)
        f = fit(x, y, LOCAL)
        grid = np.linspace(-1.9, 1.9, 200)
        assert np.mean((predict(f, grid) - grid ** 3) ** 2) < 0.01

    def test_spline_cubic_truth(self):
        rng = np.random.default_rng(6)
        x = rng.uniform(-2, 2, size=1000)
        y = x ** 3 + rng.normal(scale=0.1, size=1000)
        f = fit(x, y, SPLINE)
        grid = np.linspace(-1.9, 1.9, 200)
        assert np.mean((predict(f, grid) - grid ** 3) ** 2) < 0.01

    def test_records_pair_identity(self):
        x = np.arange(10.0)
        f = fit(x, x, SmootherConfig(tuning=1.0), predictor=2, response=0)
        assert (f.predictor, f.response, f.n_train) == (2, 0, 10)

    def test_too_few_points(self):
        with pytest.raises(DegenerateError):
            fit([1, 2, 3, 4], [1, 2, 3, 4], LOCAL)

    def test_identical_x(self):
        with pytest.raises(DegenerateError):
            fit(np.ones(10), np.arange(10.0), LOCAL)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            fit(np.arange(6.0), np.arange(7.0), LOCAL)

    def test_small_sample_with_auto_tuning(self):
        x = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
        f = fit(x, x ** 2, LOCAL)
        assert f.tuning > 0

    def test_spline_accepts_repeated_x(self):
        x = np.repeat(np.linspace(0, 1, 8), 3)
        y = np.sin(3 * x)
        f = fit(x, y, SmootherConfig(backend=SmootherBackend.SPLINE, tuning=1e-6))
        assert predict(f, np.array([0.5]))[0] == pytest.approx(np.sin(1.5), abs=0.05)


class TestPredict:
    def test_linear_extrapolation_above(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(0, 1, 80)
        y = np.sin(4 * x) + rng.normal(scale=0.05, size=80)
        f = fit(x, y, SmootherConfig(tuning=0.1))
        expected = f.upper_value + f.upper_slope * 2.0
        assert predict(f, np.array([f.upper + 2.0]))[0] == pytest.approx(expected)

    def test_linear_extrapolation_below(self):
        x = np.linspace(0, 1, 30)
        f = fit(x, np.cos(x), SmootherConfig(backend=SmootherBackend.SPLINE, tuning=1e-3))
        expected = f.lower_value - f.lower_slope * 0.5
        assert predict(f, np.array([-0.5]))[0] == pytest.approx(expected)

    def test_extrapolation_is_continuous_at_boundary(self):
        x = np.linspace(-1, 1, 40)
        f = fit(x, x ** 2, SmootherConfig(tuning=0.2))
        inside = predict(f, np.array([1.0]))[0]
        outside = predict(f, np.array([1.0 + 1e-9]))[0]
        assert outside == pytest.approx(inside, abs=1e-6)

    def test_preserves_shape(self):
        x = np.linspace(0, 1, 20)
        f = fit(x, x, SmootherConfig(tuning=0.3))
        assert predict(f, np.zeros((2, 3))).shape == (2, 3)

    def test_spline_infinite_penalty_gives_least_squares_line(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(-1, 1, 50)
        y = x ** 2 + 0.3 * x + rng.normal(scale=0.1, size=50)
        f = fit(x, y, SmootherConfig(backend=SmootherBackend.SPLINE, tuning=1e8))
        slope, intercept = np.polyfit(x, y, 1)
        t = np.linspace(-1, 1, 11)
        assert np.allclose(predict(f, t), intercept + slope * t, atol=1e-3)

    def test_large_bandwidth_gives_least_squares_line(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=100)
        y = np.exp(x) + rng.normal(scale=0.1, size=100)
        f = fit(x, y, SmootherConfig(tuning=1e6))
        slope, intercept = np.polyfit(x, y, 1)
        assert np.allclose(predict(f, x), intercept + slope * x, atol=1e-6)

    def test_grid_evaluation_for_large_samples(self):
        rng = np.random.default_rng(9)
        x = rng.uniform(-3, 3, 6000)
        y = np.sin(x) + rng.normal(scale=0.1, size=6000)
        f = fit(x, y, SmootherConfig(tuning=0.15))
        t = np.linspace(-2.5, 2.5, 9)
        assert np.allclose(predict(f, t), np.sin(t), atol=0.05)


class TestEquivariance:
    @pytest.mark.parametrize("cfg", [SmootherConfig(tuning=0.4),
                                     SmootherConfig(backend=SmootherBackend.SPLINE, tuning=0.01)])
    def test_shift(self, cfg):
        rng = np.random.default_rng(10)
        x = rng.normal(size=100)
        y = np.tanh(x) + rng.normal(scale=0.2, size=100)
        t = np.linspace(-4, 4, 17)
        base = predict(fit(x, y, cfg), t)
        shifted = predict(fit(x, y + 7.0, cfg), t)
        assert np.allclose(shifted, base + 7.0, atol=1e-8)

    @pytest.mark.parametrize("cfg", [SmootherConfig(tuning=0.4),
                                     SmootherConfig(backend=SmootherBackend.SPLINE, tuning=0.01)])
    def test_scale(self, cfg):
        rng = np.random.default_rng(11)
        x = rng.normal(size=100)
        y = np.tanh(x) + rng.normal(scale=0.2, size=100)
        t = np.linspace(-4, 4, 17)
        base = predict(fit(x, y, cfg), t)
        scaled = predict(fit(x, -3.0 * y, cfg), t)
        assert np.allclose(scaled, -3.0 * base, atol=1e-8)


class TestSelectTuning:
    def test_grid_has_expected_span(self):
        x = np.random.default_rng(0).normal(size=500)
        grid = tuning_grid(x, SmootherBackend.LOCAL_LINEAR)
        silverman = 1.06 * np.std(x) * 500 ** (-1 / 5)
        assert grid.size == GRID_SIZE
        assert grid[0] == pytest.approx(0.05 * silverman)
        assert grid[-1] == pytest.approx(20 * silverman)

    def test_deterministic(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=150)
        y = np.sin(2 * x) + rng.normal(scale=0.3, size=150)
        cfg = SmootherConfig(seed=3)
        assert select_tuning(x, y, cfg) == select_tuning(x, y, cfg)

    def test_single_candidate(self):
        x = np.linspace(0, 1, 20)
        assert select_tuning(x, x, LOCAL, grid=[0.37]) == 0.37

    def test_folds_larger_than_n(self):
        x = np.linspace(0, 1, 8)
        with pytest.raises(ValueError, match="cv_folds"):
            select_tuning(x, x, SmootherConfig(cv_folds=9))

    def test_pure_noise_prefers_smooth_half(self):
        smooth = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=100)
            y = rng.normal(size=100)
            h = select_tuning(x, y, SmootherConfig(seed=seed))
            grid = tuning_grid(x, SmootherBackend.LOCAL_LINEAR)
            smooth += int(np.argmin(np.abs(np.log(grid) - np.log(h))) >= 12)
        assert smooth >= 80

    def test_subsample_rescales_bandwidth(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=400)
        y = x + rng.normal(size=400)
        cfg = SmootherConfig(cv_max_samples=100, cv_folds=5)
        h = select_tuning(x, y, cfg)
        keep = np.sort(np.random.default_rng(0).choice(400, size=100, replace=False))
        grid = tuning_grid(x[keep], SmootherBackend.LOCAL_LINEAR) * (100 / 400) ** (1 / 5)
        assert np.min(np.abs(grid - h)) < 1e-12 * h


class TestSplinePenalty:
    def test_grid_top_is_the_linear_limit(self):
        x = np.random.default_rng(14).normal(scale=3.0, size=400)
        grid = tuning_grid(x, SmootherBackend.SPLINE)
        assert grid.size == GRID_SIZE
        assert grid[-1] == pytest.approx(np.std(x) ** 3 * 400 * LINEAR_PENALTY)
        assert np.all(np.diff(grid) > 0)

    def test_top_of_grid_stays_on_the_line(self):
        rng = np.random.default_rng(15)
        x = rng.normal(size=2000)
        y = 2 * x + rng.normal(size=2000)
        slope, intercept = np.polyfit(x, y, 1)
        grid = tuning_grid(x, SmootherBackend.SPLINE)
        t = np.linspace(-2, 2, 21)
        for lam in grid[-3:]:
            f = fit(x, y, SmootherConfig(backend=SmootherBackend.SPLINE, tuning=float(lam)))
            assert np.max(np.abs(predict(f, t) - (intercept + slope * t))) < 0.1

    def test_penalty_follows_x_scale(self):
        rng = np.random.default_rng(16)
        x = rng.uniform(-1, 1, 200)
        y = np.sin(2 * x) + rng.normal(scale=0.1, size=200)
        t = np.linspace(-0.9, 0.9, 13)
        base = predict(fit(x, y, SmootherConfig(backend=SmootherBackend.SPLINE, tuning=0.01)), t)
        # x em outra unidade: a penalidade equivalente é multiplicada por 10³
        wide = predict(fit(10 * x, y, SmootherConfig(backend=SmootherBackend.SPLINE, tuning=10.0)), 10 * t)
        assert np.allclose(wide, base, atol=1e-6)

    def test_huge_penalty_on_wide_range(self):
        rng = np.random.default_rng(17)
        x = rng.uniform(0, 1e4, 300)
        y = 1e-3 * x + np.sin(x / 500) + rng.normal(scale=0.1, size=300)
        f = fit(x, y, SmootherConfig(backend=SmootherBackend.SPLINE, tuning=1e30))
        slope, intercept = np.polyfit(x, y, 1)
        assert np.allclose(predict(f, x), intercept + slope * x, atol=1e-8)
        assert f.lower_slope == pytest.approx(slope) and f.upper_slope == pytest.approx(slope)
