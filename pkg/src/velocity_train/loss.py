"""
Rectified-flow regression objective and its exact gradients.

The loss is the batch mean of the squared error summed over coordinates:
mean_i || v(X_t^i, t^i) - (x1^i - x0^i) ||^2.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..analytic_models.mixture import sample_target
from ..rf_core.data_models import StateBatch, check_same_shape, check_state_batch
from ..rf_core.errors import DomainError, ShapeMismatchError
from ..rf_core.flow import interpolate, velocity_target
from ..rf_core.noise import NoiseSource
from .model import MlpVelocity, Params


@dataclass(frozen=True, eq=False)
class RFBatch:
    """Independent source/target pairs with per-sample times."""

    x0: StateBatch
    x1: StateBatch
    t: NDArray[np.float64]

    def __post_init__(self):
        x0 = check_state_batch(self.x0, "x0")
        x1 = check_state_batch(self.x1, "x1")
        check_same_shape(x0, x1, "x0 and x1")
        t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        if t.shape[0] != x0.shape[0]:
            raise ShapeMismatchError(f"expected {x0.shape[0]} times, got {t.shape[0]}")
        if np.any(t < 0.0) or np.any(t > 1.0):
            raise DomainError("training times must lie in [0, 1]")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "t", t)

    @property
    def size(self) -> int:
        return int(self.x0.shape[0])


def draw_batch(gm, batch_size: int, rng: NoiseSource) -> RFBatch:
    """x0 ~ N(0, I), x1 ~ target, t ~ U[0, 1], all independent."""
    x0 = rng.normal((batch_size, gm.dim))
    x1 = sample_target(gm, batch_size, rng)
    t = rng.generator.uniform(0.0, 1.0, size=batch_size)
    return RFBatch(x0, x1, t)


def _residual(model: MlpVelocity, batch: RFBatch):
    x_t = interpolate(batch.x0, batch.x1, batch.t)
    prediction, activations = model.forward(x_t, batch.t)
    return prediction - velocity_target(batch.x0, batch.x1), activations


def rf_loss(model: MlpVelocity, x0: StateBatch, x1: StateBatch, t) -> float:
    """Mean over the batch of || model(X_t, t) - (x1 - x0) ||^2."""
    x0 = np.asarray(x0, dtype=np.float64)
    t_arr = np.asarray(t, dtype=np.float64)
    if t_arr.ndim == 0:
        t_arr = np.full(x0.shape[0] if x0.ndim == 2 else 0, float(t_arr))
    residual, _ = _residual(model, RFBatch(x0, x1, t_arr))
    return float(np.mean(np.sum(residual**2, axis=1)))


def loss_and_grad(model: MlpVelocity, batch: RFBatch) -> tuple[float, Params]:
    """Loss and its gradient for every parameter, in ``model.parameters()`` order."""
    residual, activations = _residual(model, batch)
    loss = float(np.mean(np.sum(residual**2, axis=1)))

    delta = 2.0 * residual / batch.size
    grads: Params = [np.empty(0)] * (2 * len(model.weights))
    for i in range(len(model.weights) - 1, -1, -1):
        h_in = activations[i]
        grads[2 * i] = h_in.T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        if i:
            # tanh'(z) = 1 - tanh(z)^2, and h_in is tanh(z) of the previous layer
            delta = (delta @ model.weights[i].T) * (1.0 - h_in**2)
    return loss, grads


def grad_rf_loss(model: MlpVelocity, batch: RFBatch) -> Params:
    """Exact gradients of :func:`rf_loss` on ``batch``."""
    return loss_and_grad(model, batch)[1]
