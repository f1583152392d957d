"""
Identities of the linear interpolation path X_t = t X1 + (1 - t) X0.
"""

import numpy as np

from .data_models import StateBatch, check_same_shape
from .errors import DomainError
from .velocity import VelocityField

# Operations that need the score refuse t > 1 - SCORE_GUARD.
SCORE_GUARD = 1e-3


def _check_unit_time(t: float, name: str = "t") -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {t}")
    return t


def interpolate(x0: StateBatch, x1: StateBatch, t) -> StateBatch:
    """
    Point on the straight path between paired samples.

    ``t`` is a scalar or a length-B array of per-sample times.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    check_same_shape(x0, x1, "x0 and x1")

    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise DomainError("interpolation times must lie in [0, 1]")
    if t_arr.ndim == 1:
        if t_arr.shape[0] != x0.shape[0]:
            raise DomainError(
                f"expected {x0.shape[0]} per-sample times, got {t_arr.shape[0]}"
            )
        t_arr = t_arr[:, None]
    return t_arr * x1 + (1.0 - t_arr) * x0


def velocity_target(x0: StateBatch, x1: StateBatch) -> StateBatch:
    """Regression target X1 - X0."""
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    check_same_shape(x0, x1, "x0 and x1")
    return x1 - x0


def check_score_time(t: float, guard: float = SCORE_GUARD) -> float:
    """Accept t in (0, 1 - guard]."""
    t = float(t)
    if not 0.0 < t <= 1.0 - guard:
        raise DomainError(f"score requires t in (0, {1.0 - guard}], got {t}")
    return t


def score_from_velocity(
    v: VelocityField, x: StateBatch, t: float, guard: float = SCORE_GUARD
) -> StateBatch:
    """
    Score of the time-t marginal recovered from the velocity field.

    With a standard-normal source, grad log rho_t(x) = (t v(x, t) - x) / (1 - t).
    """
    t = check_score_time(t, guard)
    x = np.asarray(x, dtype=np.float64)
    return (t * np.asarray(v(x, t), dtype=np.float64) - x) / (1.0 - t)
