"""Tests for the interpolation path identities."""

import numpy as np
import pytest

from src.rf_core.errors import DomainError, ShapeMismatchError
from src.rf_core.flow import (
    SCORE_GUARD,
    interpolate,
    score_from_velocity,
    velocity_target,
)
from src.rf_core.velocity import ConstantVelocity


class TestInterpolate:
    """Test interpolate."""

    def test_midpoint(self):
        """Linear midpoint of (0,0) and (2,4)."""
        out = interpolate(np.array([[0.0, 0.0]]), np.array([[2.0, 4.0]]), 0.5)
        np.testing.assert_array_equal(out, [[1.0, 2.0]])

    def test_quarter_point(self):
        """t=0.25 between (1,-1) and (3,1)."""
        out = interpolate(np.array([[1.0, -1.0]]), np.array([[3.0, 1.0]]), 0.25)
        np.testing.assert_allclose(out, [[1.5, -0.5]], rtol=0, atol=1e-15)

    def test_endpoints_exact(self, rng_batches):
        """t=0 returns x0 and t=1 returns x1, bit for bit."""
        x0, x1 = rng_batches
        np.testing.assert_array_equal(interpolate(x0, x1, 0.0), x0)
        np.testing.assert_array_equal(interpolate(x0, x1, 1.0), x1)

    def test_per_sample_times(self):
        """A length-B time vector interpolates row by row."""
        x0 = np.zeros((3, 2))
        x1 = np.ones((3, 2))
        out = interpolate(x0, x1, np.array([0.0, 0.5, 1.0]))
        np.testing.assert_array_equal(out, [[0, 0], [0.5, 0.5], [1, 1]])

    def test_shape_mismatch(self):
        """Mismatched batches raise."""
        with pytest.raises(ShapeMismatchError):
            interpolate(np.zeros((2, 2)), np.zeros((2, 3)), 0.5)

    def test_time_out_of_range(self):
        """Times outside [0, 1] raise."""
        with pytest.raises(DomainError):
            interpolate(np.zeros((1, 2)), np.zeros((1, 2)), 1.5)


class TestVelocityTarget:
    """Test velocity_target."""

    def test_difference(self):
        """Target is x1 - x0."""
        out = velocity_target(np.array([[1.0, 2.0]]), np.array([[-1.0, 0.0]]))
        np.testing.assert_array_equal(out, [[-2.0, -2.0]])

    def test_zero_base(self):
        """Zero base point returns x1."""
        out = velocity_target(np.zeros((1, 2)), np.array([[2.0, 4.0]]))
        np.testing.assert_array_equal(out, [[2.0, 4.0]])

    def test_identity_gives_zero(self, rng_batches):
        """x0 == x1 gives the zero vector."""
        x0, _ = rng_batches
        np.testing.assert_array_equal(velocity_target(x0, x0), np.zeros_like(x0))

    def test_shape_mismatch(self):
        """Mismatched batches raise."""
        with pytest.raises(ShapeMismatchError):
            velocity_target(np.zeros((2, 2)), np.zeros((3, 2)))


class TestScoreFromVelocity:
    """Test the score identity guard and arithmetic."""

    def test_fixed_point_gives_zero_score(self):
        """When t v(x, t) = x the score vanishes."""
        x = np.array([[1.0, -2.0]])
        t = 0.4
        v = ConstantVelocity(x[0] / t)
        np.testing.assert_allclose(score_from_velocity(v, x, t), 0.0, atol=1e-15)

    def test_formula(self):
        """(t v - x) / (1 - t) evaluated directly."""
        x = np.array([[1.0, 0.0], [0.0, 3.0]])
        v = ConstantVelocity([2.0, -1.0])
        out = score_from_velocity(v, x, 0.5)
        expected = (0.5 * np.array([[2.0, -1.0], [2.0, -1.0]]) - x) / 0.5
        np.testing.assert_array_equal(out, expected)

    @pytest.mark.parametrize("t", [0.0, 1.0, 1.0 - SCORE_GUARD / 2, -0.1])
    def test_guard(self, t):
        """t must lie in (0, 1 - guard]."""
        with pytest.raises(DomainError):
            score_from_velocity(ConstantVelocity([0.0]), np.zeros((1, 1)), t)

    def test_guard_boundary_accepted(self):
        """t = 1 - guard is the last admissible time."""
        out = score_from_velocity(ConstantVelocity([0.0]), np.ones((1, 1)), 1.0 - SCORE_GUARD)
        assert np.isfinite(out).all()
