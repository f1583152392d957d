"""Tests for overshoot coefficients and sampler configuration."""

import numpy as np
import pytest

from src.rf_core.errors import DomainError, InvariantViolationError
from src.samplers.coefficients import overshoot_coefficients, overshoot_time
from src.samplers.config import OVERSHOOT_STRENGTH_PRESETS, OvershootConfig


def _reference(t: float, s: float, c: float) -> tuple[float, float, float]:
    """Straight-line evaluation of o, a and b^2."""
    o = min(s + c * (s - t), 1.0)
    a = s / o
    b2 = (1.0 - s) ** 2 - s**2 * (1.0 - o) ** 2 / o**2
    return o, a, b2


class TestOvershootCoefficients:
    """Test overshoot_coefficients."""

    def test_worked_example(self):
        """t=0.5, eps=0.1, c=1: o=0.7, a=6/7, b~0.306394."""
        coeffs = overshoot_coefficients(0.5, 0.6, 1.0)
        assert coeffs.o == pytest.approx(0.7, abs=1e-12)
        assert coeffs.a == pytest.approx(6 / 7, abs=1e-12)
        assert coeffs.b == pytest.approx(0.306394, abs=1e-6)

    def test_zero_strength_is_euler(self):
        """c=0 gives o=s, a=1, b=0 exactly."""
        coeffs = overshoot_coefficients(0.3, 0.4, 0.0)
        assert coeffs.o == 0.4
        assert coeffs.a == 1.0
        assert coeffs.b == 0.0

    def test_last_step_is_noise_free(self):
        """s=1 clamps to o=1, a=1, b=0."""
        for c in [0.5, 1.0, 4.0]:
            coeffs = overshoot_coefficients(0.9, 1.0, c)
            assert (coeffs.o, coeffs.a, coeffs.b) == (1.0, 1.0, 0.0)

    def test_clamp_caps_overshoot_time(self):
        """Overshoot beyond 1 is capped."""
        assert overshoot_coefficients(0.8, 0.9, 5.0).o == 1.0
        assert overshoot_time(0.8, 0.9, 5.0, clamp=False) == pytest.approx(1.4)

    def test_sweep_matches_reference(self):
        """10^3 random (t, eps, c) triples agree with the reference arithmetic."""
        generator = np.random.default_rng(0)
        for _ in range(1000):
            t = generator.uniform(0.0, 0.99)
            s = t + generator.uniform(1e-4, 1.0 - t)
            s = min(s, 1.0)
            c = generator.uniform(0.0, 5.0)
            coeffs = overshoot_coefficients(t, s, c)
            o, a, b2 = _reference(t, s, c)

            assert coeffs.o == pytest.approx(o, rel=1e-15, abs=1e-15)
            assert coeffs.a == pytest.approx(a, rel=1e-14)
            assert abs(coeffs.b**2 - max(b2, 0.0)) <= 1e-12
            assert coeffs.b >= 0.0
            assert b2 >= -1e-12

    def test_b_monotone_in_overshoot_time(self):
        """b is nondecreasing as o sweeps [s, 1]."""
        t, s = 0.35, 0.45
        strengths = np.linspace(0.0, (1.0 - s) / (s - t), 200)
        bs = [overshoot_coefficients(t, s, c).b for c in strengths]
        os = [overshoot_coefficients(t, s, c).o for c in strengths]
        assert os[0] == s and os[-1] == pytest.approx(1.0)
        assert np.all(np.diff(bs) >= -1e-15)

    def test_mask_vector_matches_scalar(self):
        """m=(1, 0): first coordinate scalar overshoot, second Euler."""
        scalar = overshoot_coefficients(0.5, 0.6, 1.0)
        vector = overshoot_coefficients(0.5, 0.6, 1.0, mask=np.array([1.0, 0.0]))
        assert vector.o[0] == scalar.o and vector.a[0] == scalar.a and vector.b[0] == scalar.b
        assert vector.o[1] == 0.6 and vector.a[1] == 1.0 and vector.b[1] == 0.0

    def test_unclamped_negative_variance(self):
        """Far overshoot without clamping violates b^2 >= 0."""
        with pytest.raises(InvariantViolationError):
            overshoot_coefficients(0.5, 0.9, 10.0, clamp=False)

    @pytest.mark.parametrize("t,s", [(0.5, 0.5), (0.6, 0.5), (-0.1, 0.2), (0.5, 1.1)])
    def test_invalid_step_times(self, t, s):
        """Steps need 0 <= t < s <= 1."""
        with pytest.raises(DomainError):
            overshoot_coefficients(t, s, 1.0)


class TestOvershootConfig:
    """Test OvershootConfig."""

    def test_defaults(self):
        """Clamping and compensation are on by default."""
        cfg = OvershootConfig()
        assert cfg.c == 1.0 and cfg.clamp and cfg.noise_compensation

    def test_negative_strength_rejected(self):
        """c must be >= 0."""
        with pytest.raises(DomainError):
            OvershootConfig(c=-0.1)

    def test_model_presets(self):
        """Named strengths for the public model families."""
        assert OVERSHOOT_STRENGTH_PRESETS == {"flux": 2.0, "sd3": 1.0, "auraflow": 1.0}
        assert OvershootConfig.for_model("flux").c == 2.0
        with pytest.raises(DomainError):
            OvershootConfig.for_model("unknown")

    def test_dict_round_trip(self):
        """to_dict/from_dict preserve every field."""
        cfg = OvershootConfig(c=0.5, clamp=False, noise_compensation=False)
        assert OvershootConfig.from_dict(cfg.to_dict()) == cfg
