"""
Core value types: the time grid and state batches.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError, InvariantViolationError, ShapeMismatchError

# A batch of B points in R^d, stored as a (B, d) float64 array.
StateBatch = NDArray[np.float64]

GRID_TIME_ATOL = 1e-12


def check_state_batch(x, name: str = "state") -> StateBatch:
    """
    Validate and return a (B, d) float64 batch.

    Raises:
        ShapeMismatchError: not two-dimensional, or B or d is zero
        DomainError: any entry is not finite
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatchError(
            f"{name} must be a (batch, dim) array, got shape {arr.shape}"
        )
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatchError(f"{name} must have B >= 1 and d >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def check_same_shape(a: StateBatch, b: StateBatch, what: str = "batches") -> None:
    """Raise ShapeMismatchError unless both arrays share a shape."""
    if np.shape(a) != np.shape(b):
        raise ShapeMismatchError(
            f"{what} must share a shape, got {np.shape(a)} and {np.shape(b)}"
        )


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing flow times from 0 to 1."""

    times: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", times)
        if len(times) < 2:
            raise InvariantViolationError("a time grid needs at least one step")
        if times[0] != 0.0 or times[-1] != 1.0:
            raise InvariantViolationError(
                f"a time grid must start at 0 and end at 1, got {times[0]}..{times[-1]}"
            )
        if any(b <= a for a, b in zip(times, times[1:], strict=False)):
            raise InvariantViolationError("grid times must be strictly increasing")

    @classmethod
    def uniform(cls, n_steps: int) -> "TimeGrid":
        """Grid t_k = k / N."""
        if n_steps < 1:
            raise InvariantViolationError(f"n_steps must be >= 1, got {n_steps}")
        return cls(tuple(k / n_steps for k in range(n_steps + 1)))

    @classmethod
    def from_times(cls, times: Sequence[float]) -> "TimeGrid":
        """Grid from an explicit list of times."""
        return cls(tuple(times))

    @property
    def n_steps(self) -> int:
        """Number of steps N."""
        return len(self.times) - 1

    def as_array(self) -> NDArray[np.float64]:
        """Times as a float64 array."""
        return np.asarray(self.times, dtype=np.float64)

    def steps(self) -> Iterator[tuple[int, float, float]]:
        """Yield (k, t_k, t_{k+1}) for every step."""
        for k in range(self.n_steps):
            yield k, self.times[k], self.times[k + 1]

    def index_of(self, time: float) -> int:
        """Index of a grid time, matched to within 1e-12."""
        for k, t in enumerate(self.times):
            if abs(t - time) <= GRID_TIME_ATOL:
                return k
        raise DomainError(f"time {time} is not on the grid")
