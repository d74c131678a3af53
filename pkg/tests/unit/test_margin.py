import numpy as np
import pytest
from scipy.stats import norm

from src.errors import DomainError
from src.mpc import (
    MpcConfig,
    chance_level,
    noise_gain,
    position_variance_factors,
    safety_margin,
    safety_margin_profile,
)


class TestChanceSchedule:
    def test_end_points(self):
        cfg = MpcConfig()
        assert chance_level(1, cfg) == pytest.approx(0.99)
        assert chance_level(100, cfg) == 0.5
        assert chance_level(150, cfg) == 0.5

    def test_linear_in_between(self):
        cfg = MpcConfig()
        assert chance_level(50, cfg) == pytest.approx(0.99 - 0.49 * 49 / 99)

    def test_single_step_schedule(self):
        assert chance_level(1, MpcConfig(K=1)) == 0.5


class TestNoisePropagation:
    def test_gain_blocks(self):
        dt = 0.1
        gain = noise_gain(3, dt)
        k = np.arange(1, 4)
        np.testing.assert_allclose(gain[0::2], 0.5 * k ** 2 * dt ** 2)
        np.testing.assert_allclose(gain[1::2], k * dt)

    def test_position_standard_deviation_closed_form(self):
        dt, sigma_a1 = 0.1, 0.6
        b = position_variance_factors(100, dt)
        k = np.arange(1, 101)
        np.testing.assert_allclose(np.sqrt(b) * sigma_a1, 0.5 * k ** 2 * dt ** 2 * sigma_a1, rtol=0, atol=1e-10)


class TestSafetyMargin:
    def test_vanishes_from_k_on(self):
        cfg = MpcConfig()
        for k in (100, 101, 150):
            assert safety_margin(k, cfg) == 0.0

    def test_value(self):
        cfg = MpcConfig()
        sigma_s1 = 0.5 * 10 ** 2 * 0.01 * 0.6
        expected = sigma_s1 * norm.ppf(chance_level(10, cfg))
        assert safety_margin(10, cfg) == pytest.approx(expected)

    def test_non_negative_everywhere(self):
        profile = safety_margin_profile(MpcConfig(alpha_end=0.5), 150)
        assert np.all(profile >= 0.0)
        assert profile[0] == 0.0

    def test_profile_matches_pointwise(self):
        cfg = MpcConfig(T=40, K=30)
        profile = safety_margin_profile(cfg)
        assert len(profile) == 41
        for k in (1, 7, 29, 30, 40):
            assert profile[k] == pytest.approx(safety_margin(k, cfg))

    def test_zero_noise(self):
        np.testing.assert_array_equal(safety_margin_profile(MpcConfig(sigma_a1=0.0)), 0.0)

    def test_k_must_be_positive(self):
        with pytest.raises(DomainError):
            safety_margin(0, MpcConfig())
