"""
The velocity-field abstraction.
"""

from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import NDArray

from .data_models import StateBatch
from .errors import NonFiniteStateError, ShapeMismatchError


@runtime_checkable
class VelocityField(Protocol):
    """
    Deterministic batch evaluator ``v(x, t)``.

    ``x`` is a (B, d) batch; ``t`` is a scalar time shared by the batch or a
    length-B array of per-sample times. The result has the shape of ``x``.
    """

    def __call__(self, x: StateBatch, t: float | NDArray[np.float64]) -> StateBatch: ...


class ConstantVelocity:
    """v(x, t) = u for every point and time."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=np.float64)

    def __call__(self, x: StateBatch, t: float | NDArray[np.float64]) -> StateBatch:
        return np.broadcast_to(self.value, np.shape(x)).copy()


def evaluate_velocity(
    v: VelocityField, x: StateBatch, t: float, step_index: int
) -> StateBatch:
    """
    Evaluate ``v`` inside a sampler loop.

    Raises:
        ShapeMismatchError: the field returned the wrong shape
        NonFiniteStateError: the field returned non-finite values
    """
    out = np.asarray(v(x, t), dtype=np.float64)
    if out.shape != x.shape:
        raise ShapeMismatchError(
            f"velocity returned shape {out.shape} for state shape {x.shape}"
        )
    if not np.all(np.isfinite(out)):
        raise NonFiniteStateError(f"non-finite velocity at t={t}", step_index)
    return out
