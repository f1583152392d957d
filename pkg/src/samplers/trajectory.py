"""
Sampler trajectories and their CSV export.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..rf_core.data_models import StateBatch, TimeGrid
from ..rf_core.errors import DomainError, InvariantViolationError
from ..shared_utilities.output_formatter import format_rows_csv


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One snapshot per grid time; every snapshot is (B, d)."""

    grid: TimeGrid
    states: tuple[StateBatch, ...]

    def __post_init__(self):
        states = tuple(self.states)
        if len(states) != len(self.grid.times):
            raise InvariantViolationError(
                f"{len(states)} snapshots for {len(self.grid.times)} grid times"
            )
        shape = states[0].shape
        if any(state.shape != shape for state in states):
            raise InvariantViolationError("snapshot shapes must be constant")
        for state in states:
            state.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def times(self) -> tuple[float, ...]:
        """Grid times of the snapshots."""
        return self.grid.times

    @property
    def final(self) -> StateBatch:
        """State at t = 1."""
        return self.states[-1]

    @property
    def n_paths(self) -> int:
        """Batch size B."""
        return int(self.final.shape[0])

    @property
    def dim(self) -> int:
        """Dimension d."""
        return int(self.final.shape[1])

    def at(self, time: float) -> StateBatch:
        """Snapshot at a grid time."""
        return self.states[self.grid.index_of(time)]

    def to_rows(self, thin: int = 1, max_paths: int | None = None) -> list[dict[str, Any]]:
        """
        Long-format rows (path_id, step, time, x_0..x_{d-1}).

        Every ``thin``-th step is kept, and the final step always is.
        """
        if thin < 1:
            raise DomainError(f"thin must be >= 1, got {thin}")
        n_paths = self.n_paths if max_paths is None else min(max_paths, self.n_paths)
        last = len(self.states) - 1
        rows: list[dict[str, Any]] = []
        for step, (time, state) in enumerate(zip(self.times, self.states, strict=True)):
            if step % thin and step != last:
                continue
            for path_id in range(n_paths):
                row: dict[str, Any] = {"path_id": path_id, "step": step, "time": time}
                row.update({f"x_{j}": float(state[path_id, j]) for j in range(self.dim)})
                rows.append(row)
        return rows

    def fieldnames(self) -> list[str]:
        """CSV column order."""
        return ["path_id", "step", "time"] + [f"x_{j}" for j in range(self.dim)]

    def to_csv(self, thin: int = 1, max_paths: int | None = None) -> str:
        """CSV export of :meth:`to_rows`."""
        return format_rows_csv(self.to_rows(thin, max_paths), self.fieldnames())


def points_rows(points: StateBatch, label: str, columns: Sequence[str] | None = None) -> list[dict[str, Any]]:
    """Point-cloud rows (label, index, x_0..) for plotting."""
    points = np.asarray(points)
    names = list(columns) if columns else [f"x_{j}" for j in range(points.shape[1])]
    return [
        {"label": label, "index": i, **{name: float(value) for name, value in zip(names, row, strict=True)}}
        for i, row in enumerate(points)
    ]
