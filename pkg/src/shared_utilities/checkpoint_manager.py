"""
Checkpoint management for long-running loops such as model training.

Save strategies decide *when* a snapshot is due; the manager records the
snapshot in memory and, when given a directory, persists it atomically.
"""

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime
from datetime import timezone as _timezone
from pathlib import Path
from typing import Any

from . import get_logger
from .output_manager import write_atomic

UTC = _timezone.utc  # datetime.UTC is 3.11+; identical object


@dataclass
class CheckpointContext:
    """Progress information used for checkpoint decisions."""

    step: int = 0
    total_steps: int | None = None
    loss: float | None = None


@dataclass
class CheckpointRecord:
    """One saved snapshot."""

    operation_id: str
    step: int
    state: dict[str, Any]
    reason: str
    created_at: str = field(
        default_factory=lambda: datetime.now(UTC).isoformat(timespec="seconds")
    )

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "operation_id": self.operation_id,
            "step": self.step,
            "state": self.state,
            "reason": self.reason,
            "created_at": self.created_at,
        }


class SaveStrategy(ABC):
    """Base class for checkpoint save strategies."""

    @abstractmethod
    def should_save(self, context: CheckpointContext) -> tuple[bool, str]:
        """
        Determine if a checkpoint should be saved.

        Returns:
            Tuple of (should_save, reason)
        """


class ProgressBasedStrategy(SaveStrategy):
    """Save every ``steps_interval`` steps."""

    def __init__(self, steps_interval: int = 1000):
        """Initialize with number of steps between saves."""
        if steps_interval < 1:
            raise ValueError("steps_interval must be >= 1")
        self.steps_interval = steps_interval

    def should_save(self, context: CheckpointContext) -> tuple[bool, str]:
        """Save on multiples of the interval."""
        if context.step > 0 and context.step % self.steps_interval == 0:
            return True, f"Progress-based: step {context.step}"
        return False, ""


class FinalStepStrategy(SaveStrategy):
    """Save when the loop reaches its last step."""

    def should_save(self, context: CheckpointContext) -> tuple[bool, str]:
        """Save on the final step."""
        if context.total_steps is not None and context.step == context.total_steps:
            return True, "Final step"
        return False, ""


class CompositeStrategy(SaveStrategy):
    """Save when any child strategy does."""

    def __init__(self, strategies: list[SaveStrategy]):
        """Initialize with child strategies."""
        self.strategies = strategies

    def should_save(self, context: CheckpointContext) -> tuple[bool, str]:
        """Join the reasons of every child that asks for a save."""
        results = [s.should_save(context) for s in self.strategies]
        reasons = [reason for ok, reason in results if ok]
        return bool(reasons), "; ".join(reasons)


class CheckpointManager:
    """Records snapshots chosen by a save strategy."""

    def __init__(
        self,
        strategy: SaveStrategy,
        checkpoint_dir: Path | None = None,
    ):
        """
        Initialize the manager.

        Args:
            strategy: Decides which steps are saved
            checkpoint_dir: Persist snapshots here as JSON when given
        """
        self.strategy = strategy
        self.checkpoint_dir = checkpoint_dir
        self.records: list[CheckpointRecord] = []
        self.logger = get_logger(__name__)

    def _get_checkpoint_path(self, operation_id: str, step: int) -> Path:
        assert self.checkpoint_dir is not None
        return self.checkpoint_dir / f"{operation_id}_step{step:06d}.json"

    def maybe_save(
        self, operation_id: str, context: CheckpointContext, state_fn
    ) -> CheckpointRecord | None:
        """
        Save a snapshot if the strategy asks for one.

        Args:
            operation_id: Identifier used in file names
            context: Current progress
            state_fn: Zero-argument callable producing the JSON-ready state

        Returns:
            The new record, or None when nothing was saved
        """
        should_save, reason = self.strategy.should_save(context)
        if not should_save:
            return None

        record = CheckpointRecord(
            operation_id=operation_id, step=context.step, state=state_fn(), reason=reason
        )
        self.records.append(record)

        if self.checkpoint_dir is not None:
            path = self._get_checkpoint_path(operation_id, context.step)
            write_atomic(path, json.dumps(record.to_dict(), sort_keys=True))
            self.logger.debug("Checkpoint written", path=str(path), reason=reason)

        return record
