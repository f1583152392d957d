"""Tests for the time grid and state-batch validation."""

import numpy as np
import pytest

from src.rf_core.data_models import TimeGrid, check_same_shape, check_state_batch
from src.rf_core.errors import DomainError, InvariantViolationError, ShapeMismatchError


class TestTimeGrid:
    """Test TimeGrid construction and iteration."""

    def test_uniform_grid_endpoints(self):
        """Uniform grids start at 0 and end exactly at 1."""
        grid = TimeGrid.uniform(7)

        assert grid.n_steps == 7
        assert grid.times[0] == 0.0
        assert grid.times[-1] == 1.0
        assert all(b > a for a, b in zip(grid.times, grid.times[1:], strict=False))

    def test_single_step_grid(self):
        """N=1 is the smallest valid grid."""
        grid = TimeGrid.uniform(1)
        assert grid.times == (0.0, 1.0)
        assert list(grid.steps()) == [(0, 0.0, 1.0)]

    def test_steps_yield_consecutive_pairs(self):
        """steps() yields (k, t_k, t_k+1)."""
        grid = TimeGrid.from_times([0.0, 0.3, 0.5, 1.0])
        assert list(grid.steps()) == [(0, 0.0, 0.3), (1, 0.3, 0.5), (2, 0.5, 1.0)]

    @pytest.mark.parametrize(
        "times",
        [
            [0.0],
            [0.1, 1.0],
            [0.0, 0.9],
            [0.0, 0.5, 0.5, 1.0],
            [0.0, 0.7, 0.3, 1.0],
        ],
    )
    def test_invalid_grids_rejected(self, times):
        """Grids must start at 0, end at 1 and increase strictly."""
        with pytest.raises(InvariantViolationError):
            TimeGrid.from_times(times)

    def test_zero_steps_rejected(self):
        """N=0 is not a grid."""
        with pytest.raises(InvariantViolationError):
            TimeGrid.uniform(0)

    def test_index_of(self):
        """Grid times are located with a tight tolerance."""
        grid = TimeGrid.uniform(10)
        assert grid.index_of(0.5) == 5
        assert grid.index_of(0.3 + 1e-14) == 3
        with pytest.raises(DomainError):
            grid.index_of(0.55)

    def test_grid_is_immutable(self):
        """TimeGrid is frozen."""
        grid = TimeGrid.uniform(2)
        with pytest.raises(AttributeError):
            grid.times = (0.0, 1.0)  # type: ignore[misc]

    def test_as_array(self):
        """as_array returns float64 times."""
        arr = TimeGrid.uniform(4).as_array()
        assert arr.dtype == np.float64
        np.testing.assert_array_equal(arr, [0.0, 0.25, 0.5, 0.75, 1.0])


class TestStateBatch:
    """Test batch validation helpers."""

    def test_valid_batch_is_float64(self):
        """Integer input is promoted to float64."""
        arr = check_state_batch([[1, 2], [3, 4]])
        assert arr.dtype == np.float64
        assert arr.shape == (2, 2)

    @pytest.mark.parametrize("bad", [[1.0, 2.0], np.zeros((0, 2)), np.zeros((3, 0))])
    def test_bad_shapes_rejected(self, bad):
        """Batches must be (B, d) with B, d >= 1."""
        with pytest.raises(ShapeMismatchError):
            check_state_batch(bad)

    def test_non_finite_rejected(self):
        """NaN and inf entries are rejected."""
        with pytest.raises(DomainError):
            check_state_batch([[0.0, np.nan]])
        with pytest.raises(DomainError):
            check_state_batch([[np.inf, 0.0]])

    def test_shape_mismatch(self):
        """check_same_shape compares full shapes."""
        check_same_shape(np.zeros((2, 3)), np.ones((2, 3)))
        with pytest.raises(ShapeMismatchError):
            check_same_shape(np.zeros((2, 3)), np.zeros((3, 2)))
