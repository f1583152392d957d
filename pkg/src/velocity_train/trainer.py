"""
Training loop for the MLP velocity model on a Gaussian-mixture target.
"""

import json
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..rf_core.errors import DomainError, ShapeMismatchError, TrainingDivergedError
from ..rf_core.noise import NoiseSource
from ..shared_utilities import get_logger
from ..shared_utilities.checkpoint_manager import (
    CheckpointContext,
    CheckpointManager,
    CompositeStrategy,
    FinalStepStrategy,
    ProgressBasedStrategy,
)
from ..shared_utilities.output_formatter import format_json, format_rows_csv
from ..shared_utilities.output_manager import write_atomic
from ..shared_utilities.telemetry import trace_function
from .loss import draw_batch, loss_and_grad
from .model import DEFAULT_HIDDEN, TIME_FEATURES, MlpVelocity
from .optimizers import OPTIMIZERS, SCHEDULES, get_optimizer, learning_rate

logger = get_logger(__name__)

TIME_SAMPLING = ("uniform",)


@dataclass(frozen=True)
class TrainConfig:
    """
    Training hyperparameters.

    Attributes:
        batch_size: Pairs per step
        n_steps: Optimizer steps; 0 returns the initialized model
        learning_rate: Base rate
        optimizer: "rmsprop" (default) or "sgd"
        schedule: "cosine" (default) or "constant"
        seed: Seeds initialization and data independently
        time_sampling: Law of the training times; t ~ U[0, 1]
        hidden_sizes: Hidden layer widths
        time_features: "concat" or "sinusoidal"
        n_frequencies: Sinusoidal frequencies
        checkpoint_every: Snapshot interval in steps (0 disables)
        log_every: Progress log interval in steps
    """

    batch_size: int = 256
    n_steps: int = 3000
    learning_rate: float = 3e-3
    optimizer: str = "rmsprop"
    schedule: str = "cosine"
    seed: int = 0
    time_sampling: str = "uniform"
    hidden_sizes: tuple[int, ...] = DEFAULT_HIDDEN
    time_features: str = "concat"
    n_frequencies: int = 4
    checkpoint_every: int = 0
    log_every: int = 500

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.n_steps < 0:
            raise DomainError(f"n_steps must be >= 0, got {self.n_steps}")
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0.0):
            raise DomainError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.optimizer not in OPTIMIZERS:
            raise DomainError(f"unknown optimizer '{self.optimizer}'")
        if self.schedule not in SCHEDULES:
            raise DomainError(f"unknown schedule '{self.schedule}'")
        if self.time_sampling not in TIME_SAMPLING:
            raise DomainError(f"unknown time sampling '{self.time_sampling}'")
        if self.time_features not in TIME_FEATURES:
            raise DomainError(f"unknown time features '{self.time_features}'")
        if self.checkpoint_every < 0 or self.log_every < 1:
            raise DomainError("checkpoint_every must be >= 0 and log_every >= 1")

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["hidden_sizes"] = list(self.hidden_sizes)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainConfig":
        """Create from a dictionary; unknown keys raise."""
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown training options: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class ModelSnapshot:
    """Model parameters at a training step."""

    step: int
    loss: float
    model: MlpVelocity


@dataclass(eq=False)
class TrainingResult:
    """Trained model, loss curve and periodic snapshots."""

    model: MlpVelocity
    config: TrainConfig
    losses: list[float] = field(default_factory=list)
    snapshots: list[ModelSnapshot] = field(default_factory=list)

    def loss_rows(self) -> list[dict[str, Any]]:
        return [{"step": i + 1, "loss": loss} for i, loss in enumerate(self.losses)]

    def loss_curve_csv(self) -> str:
        """CSV (step, loss)."""
        return format_rows_csv(self.loss_rows(), ["step", "loss"])


@trace_function("velocity_train.train")
def train_with_history(
    gm, cfg: TrainConfig, checkpoint_dir: Path | None = None
) -> TrainingResult:
    """
    Fit an MLP to the rectified-flow objective for ``gm``.

    Raises:
        TrainingDivergedError: the loss or the parameters became non-finite
    """
    root = NoiseSource(cfg.seed)
    model = MlpVelocity.initialize(
        gm.dim, cfg.hidden_sizes, cfg.time_features, cfg.n_frequencies, rng=root.spawn(0)
    )
    data_rng = root.spawn(1)
    optimizer = get_optimizer(cfg.optimizer)
    manager = (
        CheckpointManager(
            CompositeStrategy(
                [ProgressBasedStrategy(cfg.checkpoint_every), FinalStepStrategy()]
            ),
            checkpoint_dir,
        )
        if cfg.checkpoint_every
        else None
    )
    result = TrainingResult(model=model, config=cfg)
    logger.info(
        "Training started",
        architecture=repr(model),
        n_parameters=model.n_parameters,
        n_steps=cfg.n_steps,
        optimizer=cfg.optimizer,
    )

    params = model.parameters()
    last_finite: float | None = None
    for step in range(1, cfg.n_steps + 1):
        batch = draw_batch(gm, cfg.batch_size, data_rng)
        loss, grads = loss_and_grad(model, batch)
        if not math.isfinite(loss):
            raise TrainingDivergedError(step, last_finite)
        lr = learning_rate(cfg.schedule, cfg.learning_rate, step, cfg.n_steps)
        params = optimizer.update(params, grads, lr)
        if not all(np.all(np.isfinite(p)) for p in params):
            raise TrainingDivergedError(step, loss)
        model = model.with_parameters(params)
        last_finite = loss
        result.losses.append(loss)

        if step % cfg.log_every == 0:
            logger.info("Training progress", step=step, loss=loss, lr=lr)
        if manager is not None:
            record = manager.maybe_save(
                "model",
                CheckpointContext(step=step, total_steps=cfg.n_steps, loss=loss),
                lambda m=model, value=loss: {"loss": value, "model": m.to_dict()},
            )
            if record is not None:
                result.snapshots.append(ModelSnapshot(step, loss, model))

    result.model = model
    logger.info(
        "Training finished",
        n_steps=cfg.n_steps,
        final_loss=result.losses[-1] if result.losses else None,
    )
    return result


def train(gm, cfg: TrainConfig) -> MlpVelocity:
    """Trained model only."""
    return train_with_history(gm, cfg).model


def save_model(model: MlpVelocity, path: Path, metadata: dict[str, Any] | None = None) -> Path:
    """Write a JSON checkpoint atomically."""
    document = {"model": model.to_dict(), "metadata": metadata or {}}
    return write_atomic(Path(path), format_json(document))


def load_model(path: Path) -> MlpVelocity:
    """Read a checkpoint written by :func:`save_model` or a training snapshot."""
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ShapeMismatchError(f"cannot read model checkpoint {path}: {e}") from e
    if "state" in document:
        document = document["state"]
    return MlpVelocity.from_dict(document["model"] if "model" in document else document)


def probe_grid(
    center: Sequence[float], half_width: float, n: int = 10
) -> np.ndarray:
    """n x n grid of 2-D probe points around ``center``."""
    axis_x = np.linspace(center[0] - half_width, center[0] + half_width, n)
    axis_y = np.linspace(center[1] - half_width, center[1] + half_width, n)
    xx, yy = np.meshgrid(axis_x, axis_y, indexing="ij")
    return np.column_stack([xx.reshape(-1), yy.reshape(-1)])
