"""Window statistics, relaxation fits, and feasibility ratios."""

import math

import numpy as np
import pytest

from dicke.analysis import (
    FitKind,
    feasibility_ratios,
    fit_exponential_saturation,
    fit_translated_logistic,
    temporal_fluctuations,
    windowed_time_average,
)


class TestWindowedAverage:
    def test_constant(self):
        t = np.linspace(0, 10, 101)
        assert windowed_time_average(t, np.full_like(t, 3.7), 2.0, 5.0) == pytest.approx(3.7)

    def test_sine_whole_periods(self):
        t = np.linspace(0, 20 * math.pi, 20001)
        assert abs(windowed_time_average(t, np.sin(t), 0.0, 20 * math.pi)) < 1e-9

    def test_saturating_exponential_closed_form(self):
        # y = 2(1 - e^{-0.1 t}) averaged over [150, 300]
        t = np.linspace(0, 320, 32001)
        y = 2.0 * (1.0 - np.exp(-0.1 * t))
        expect = 2.0 + (20.0 / 150.0) * (math.exp(-30.0) - math.exp(-15.0))
        assert windowed_time_average(t, y, 150.0, 150.0) == pytest.approx(expect, abs=1e-9)

    def test_empty_window_rejected(self):
        t = np.linspace(0, 10, 11)
        with pytest.raises(ValueError, match="empty window"):
            windowed_time_average(t, t, 5.0, 0.0)
        with pytest.raises(ValueError, match="outside"):
            windowed_time_average(t, t, 8.0, 5.0)

    def test_linearity_and_shift_invariance(self):
        rng = np.random.default_rng(11)
        t = np.linspace(0, 30, 601)
        y = rng.standard_normal(t.size)
        z = rng.standard_normal(t.size)
        a, b = 2.5, -1.2
        combined = windowed_time_average(t, a * y + b * z, 5.0, 20.0)
        assert combined == pytest.approx(
            a * windowed_time_average(t, y, 5.0, 20.0)
            + b * windowed_time_average(t, z, 5.0, 20.0),
            rel=1e-12, abs=1e-12,
        )
        shift = 7.0
        assert windowed_time_average(t + shift, y, 5.0 + shift, 20.0) == pytest.approx(
            windowed_time_average(t, y, 5.0, 20.0), rel=1e-12, abs=1e-12
        )


class TestTemporalFluctuations:
    def test_constant_is_zero(self):
        t = np.linspace(0, 10, 101)
        assert temporal_fluctuations(t, np.full_like(t, 2.0), 0.0, 10.0) == pytest.approx(0.0, abs=1e-14)

    def test_sine_ripple_closed_form(self):
        # y = 1 + 0.1 sin t: variance = 0.01/2, mean = 1
        t = np.linspace(0, 40 * math.pi, 40001)
        y = 1.0 + 0.1 * np.sin(t)
        assert temporal_fluctuations(t, y, 0.0, 40 * math.pi) == pytest.approx(0.005, abs=1e-6)

    def test_non_negative(self):
        rng = np.random.default_rng(12)
        t = np.linspace(0, 10, 501)
        for _ in range(20):
            y = rng.standard_normal(t.size) + 5.0
            assert temporal_fluctuations(t, y, 1.0, 8.0) >= 0.0

    def test_zero_mean_rejected(self):
        t = np.linspace(0, 10, 101)
        with pytest.raises(ValueError, match="normalization"):
            temporal_fluctuations(t, np.zeros_like(t), 0.0, 10.0)


class TestExponentialFit:
    def test_exact_recovery(self):
        t = np.linspace(0, 40, 400)
        y = 3.0 * (1.0 - np.exp(-0.2 * t))
        fit = fit_exponential_saturation(t, y)
        assert fit.converged
        assert fit.params["A"] == pytest.approx(3.0, abs=1e-6)
        assert fit.params["gamma"] == pytest.approx(0.2, abs=1e-6)
        assert fit.gamma_effective == fit.params["gamma"]

    def test_noisy_recovery_within_5_percent(self):
        rng = np.random.default_rng(0)
        t = np.linspace(0, 60, 600)
        y = 3.0 * (1.0 - np.exp(-0.2 * t))
        y_noisy = y + 0.01 * 3.0 * rng.standard_normal(t.size)
        fit = fit_exponential_saturation(t, y_noisy)
        assert fit.converged
        assert abs(fit.params["gamma"] - 0.2) / 0.2 < 0.05

    def test_constant_zero_not_converged(self):
        t = np.linspace(0, 10, 50)
        fit = fit_exponential_saturation(t, np.zeros_like(t))
        assert not fit.converged

    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="10 samples"):
            fit_exponential_saturation(np.arange(5.0), np.arange(5.0))

    def test_scale_equivariance(self):
        t = np.linspace(0, 50, 500)
        y = 2.0 * (1.0 - np.exp(-0.31 * t))
        k = 7.3
        f1 = fit_exponential_saturation(t, y)
        f2 = fit_exponential_saturation(t, k * y)
        assert f2.params["A"] == pytest.approx(k * f1.params["A"], rel=1e-9)
        assert f2.gamma_effective == pytest.approx(f1.gamma_effective, rel=1e-9)


class TestLogisticFit:
    def test_exact_recovery_and_rate_identity(self):
        a, c, t0 = 2.0, 0.5, 10.0
        b = a / (1.0 + math.exp(c * t0))  # so y(0) = 0
        t = np.linspace(0, 60, 600)
        y = a / (1.0 + np.exp(-c * (t - t0))) - b
        fit = fit_translated_logistic(t, y)
        assert fit.converged
        assert fit.params["a"] == pytest.approx(a, abs=1e-4)
        assert fit.params["c"] == pytest.approx(c, abs=1e-4)
        assert fit.params["t0"] == pytest.approx(t0, abs=1e-3)
        assert fit.gamma_effective == pytest.approx(0.6, abs=1e-4)
        # the rate identity holds exactly for the fitted parameters
        assert fit.gamma_effective == fit.params["c"] + 1.0 / fit.params["t0"]

    def test_consistency_with_exponential_fit(self):
        # the two rate notions are proxies, not the same number: c + 1/t0
        # systematically exceeds the exponential rate (factor ~3 on clean
        # sigmoids).  Consistency means they rank relaxation speeds the
        # same way and stay within a bounded factor of each other.
        t = np.linspace(0, 120, 1200)
        ge_list, gl_list = [], []
        for speed in (0.5, 1.0, 2.0, 4.0):
            a, c, t0 = 2.0, 0.35 * speed, 6.0 / speed
            b = a / (1.0 + math.exp(c * t0))
            y = a / (1.0 + np.exp(-c * (t - t0))) - b
            ge_list.append(fit_exponential_saturation(t, y).gamma_effective)
            gl_list.append(fit_translated_logistic(t, y).gamma_effective)
        assert all(np.diff(ge_list) > 0)
        assert all(np.diff(gl_list) > 0)
        for ge, gl in zip(ge_list, gl_list):
            assert 1.0 < gl / ge < 8.0

    def test_zero_delay_limit_flagged_unidentifiable(self):
        # pure exponential-saturation data drives the logistic fit into its
        # tanh limit (t0 -> 0) where c + 1/t0 diverges; that must be flagged,
        # not reported as a rate
        t = np.linspace(0, 80, 800)
        y = 1.5 * (1.0 - np.exp(-0.15 * t))
        fit = fit_translated_logistic(t, y)
        assert not fit.converged
        assert "unidentifiable" in fit.meta["message"]

    def test_decreasing_series_not_converged(self):
        t = np.linspace(0, 20, 100)
        fit = fit_translated_logistic(t, 3.0 * np.exp(-0.3 * t))
        assert not fit.converged

    def test_scale_equivariance(self):
        a, c, t0 = 1.1, 0.4, 8.0
        b = a / (1.0 + math.exp(c * t0))
        t = np.linspace(0, 50, 500)
        y = a / (1.0 + np.exp(-c * (t - t0))) - b
        k = 3.7
        f1 = fit_translated_logistic(t, y)
        f2 = fit_translated_logistic(t, k * y)
        assert f2.params["a"] == pytest.approx(k * f1.params["a"], rel=1e-6)
        assert f2.gamma_effective == pytest.approx(f1.gamma_effective, rel=1e-9)

    def test_kind_tags(self):
        t = np.linspace(0, 30, 200)
        y = 1.0 - np.exp(-t)
        assert fit_exponential_saturation(t, y).kind is FitKind.EXPONENTIAL_SATURATION
        assert fit_translated_logistic(t, y).kind is FitKind.TRANSLATED_LOGISTIC


class TestFeasibility:
    # 2g/(2pi) = 3.7 kHz -> 2g = 2 pi * 3700 rad/s
    G = math.pi * 3700.0

    def test_boson_regime_value(self):
        d_ratio, _ = feasibility_ratios(self.G, 550.0, 0.1)
        assert d_ratio == pytest.approx(13.0, abs=1.0)

    def test_eta_inversion_symmetry(self):
        d_lo, o_lo = feasibility_ratios(self.G, 550.0, 0.1)
        d_hi, o_hi = feasibility_ratios(self.G, 550.0, 10.0)
        assert o_hi == pytest.approx(d_lo, rel=1e-12)
        assert d_hi == pytest.approx(o_lo, rel=1e-12)

    def test_eta_unity(self):
        d, o = feasibility_ratios(self.G, 550.0, 1.0)
        assert d == pytest.approx(2 * self.G / 550.0, rel=1e-12)
        assert o == pytest.approx(2 * self.G / 550.0, rel=1e-12)

    def test_product_identity(self):
        for eta in (0.03, 0.5, 2.0, 30.0):
            d, o = feasibility_ratios(self.G, 550.0, eta)
            assert d * o == pytest.approx((2 * self.G / 550.0) ** 2, rel=1e-12)

    def test_positivity_guard(self):
        with pytest.raises(ValueError):
            feasibility_ratios(-1.0, 550.0, 0.1)
