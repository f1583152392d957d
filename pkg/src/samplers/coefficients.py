"""
Noise-compensation coefficients of the overshoot step.

Advancing the ODE from t past s to the overshoot time o and mapping back
with Z_s = a Z_o + b xi keeps the interpolation law at s when
a = s / o and b^2 = (1 - s)^2 - (a (1 - o))^2.
With a per-coordinate mask m the strength becomes c * m_i and every
quantity is a vector; m_i = 1 reproduces the scalar arithmetic exactly.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..rf_core.errors import DomainError, InvariantViolationError

B2_TOLERANCE = 1e-12

Coefficient = float | NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class StepCoefficients:
    """Overshoot time o with the rescale a and noise scale b."""

    o: Coefficient
    a: Coefficient
    b: Coefficient


def check_step_times(t: float, s: float) -> tuple[float, float]:
    """Require 0 <= t < s <= 1."""
    t, s = float(t), float(s)
    if not 0.0 <= t < s <= 1.0:
        raise DomainError(f"step times must satisfy 0 <= t < s <= 1, got t={t}, s={s}")
    return t, s


def overshoot_time(
    t: float, s: float, c: float, mask: NDArray[np.float64] | None = None, clamp: bool = True
) -> Coefficient:
    """o = s + c (s - t) m, capped at 1 when clamping."""
    stretch = c * (s - t)
    if mask is not None:
        stretch = stretch * np.asarray(mask, dtype=np.float64)
    o = s + stretch
    if clamp:
        o = np.minimum(o, 1.0) if mask is not None else min(o, 1.0)
    return o


def overshoot_coefficients(
    t: float,
    s: float,
    c: float,
    mask: NDArray[np.float64] | None = None,
    clamp: bool = True,
) -> StepCoefficients:
    """
    Coefficients for one step from t to s.

    Raises:
        DomainError: t, s or c outside their domain
        InvariantViolationError: b^2 below -1e-12 (only reachable unclamped)
    """
    t, s = check_step_times(t, s)
    if c < 0.0:
        raise DomainError(f"c must be >= 0, got {c}")

    o = overshoot_time(t, s, c, mask, clamp)
    a = s / o
    b2 = (1.0 - s) ** 2 - (a * (1.0 - o)) ** 2

    if np.any(b2 < -B2_TOLERANCE):
        raise InvariantViolationError(
            f"negative noise variance b^2={np.min(b2)!r} for t={t}, s={s}, c={c}"
        )
    if mask is None:
        b = float(np.sqrt(max(b2, 0.0)))
        return StepCoefficients(o=float(o), a=float(a), b=b)
    return StepCoefficients(o=o, a=a, b=np.sqrt(np.maximum(b2, 0.0)))
