"""
Parameter update rules and learning-rate schedules for training.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Sequence

import numpy as np

from ..rf_core.errors import DomainError
from .model import Params

SCHEDULES = ("constant", "cosine")


class Optimizer(ABC):
    """Maps (params, grads, lr) to new params; may keep per-parameter state."""

    name = "base"

    @abstractmethod
    def update(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray], lr: float) -> Params:
        """Return updated copies of ``params``."""
        pass


class SGD(Optimizer):
    """Plain gradient descent with the given rate."""

    name = "sgd"

    def update(self, params, grads, lr):
        return [p - lr * g for p, g in zip(params, grads, strict=True)]


class RMSProp(Optimizer):
    """Momentum-free adaptive steps scaled by a running mean of squared gradients."""

    name = "rmsprop"

    def __init__(self, decay: float = 0.9, eps: float = 1e-8):
        if not 0.0 <= decay < 1.0:
            raise DomainError(f"decay must lie in [0, 1), got {decay}")
        self.decay = decay
        self.eps = eps
        self._mean_square: Params | None = None

    def update(self, params, grads, lr):
        if self._mean_square is None:
            self._mean_square = [np.zeros_like(g) for g in grads]
        self._mean_square = [
            self.decay * m + (1.0 - self.decay) * g**2
            for m, g in zip(self._mean_square, grads, strict=True)
        ]
        return [
            p - lr * g / (np.sqrt(m) + self.eps)
            for p, g, m in zip(params, grads, self._mean_square, strict=True)
        ]


OPTIMIZERS: dict[str, type[Optimizer]] = {SGD.name: SGD, RMSProp.name: RMSProp}


def get_optimizer(name: str) -> Optimizer:
    """Fresh optimizer instance by name."""
    try:
        return OPTIMIZERS[name]()
    except KeyError as e:
        raise DomainError(
            f"unknown optimizer '{name}', available: {', '.join(OPTIMIZERS)}"
        ) from e


def learning_rate(schedule: str, base: float, step: int, total_steps: int) -> float:
    """
    Rate for 1-based ``step`` of ``total_steps``.

    "cosine" decays from ``base`` at the first step to 0 after the last.
    """
    if schedule == "constant":
        return base
    if schedule == "cosine":
        progress = (step - 1) / max(total_steps, 1)
        return 0.5 * base * (1.0 + math.cos(math.pi * progress))
    raise DomainError(f"unknown schedule '{schedule}', expected one of {SCHEDULES}")
