"""
Trainable MLP velocity model and the rectified-flow regression objective.
"""

from .loss import RFBatch, draw_batch, grad_rf_loss, loss_and_grad, rf_loss
from .model import MlpVelocity
from .optimizers import OPTIMIZERS, get_optimizer, learning_rate
from .trainer import (
    ModelSnapshot,
    TrainConfig,
    TrainingResult,
    load_model,
    save_model,
    train,
    train_with_history,
)

__all__ = [
    "RFBatch",
    "draw_batch",
    "grad_rf_loss",
    "loss_and_grad",
    "rf_loss",
    "MlpVelocity",
    "OPTIMIZERS",
    "get_optimizer",
    "learning_rate",
    "ModelSnapshot",
    "TrainConfig",
    "TrainingResult",
    "load_model",
    "save_model",
    "train",
    "train_with_history",
]
