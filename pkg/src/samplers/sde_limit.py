"""
Small-step agreement between the overshoot step and its limiting SDE.

Given the state z and the velocity value v at time t, one overshoot step
to s = t + eps has exact conditional mean a (z + (o - t) v) and variance b^2;
the SDE predicts z + eps ((1 + c) v - (c / t) z) and 2 c (1 - t) eps / t.
The mean residual is c (1 + c) eps^2 (z - t v) / (t o), second order in eps.
"""

from collections.abc import Sequence
from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import NDArray

from ..rf_core.errors import DomainError
from ..rf_core.noise import NoiseSource
from ..rf_core.velocity import ConstantVelocity
from .coefficients import overshoot_coefficients
from .config import OvershootConfig
from .steps import overshoot_step


@dataclass(frozen=True)
class StepMoments:
    """Conditional mean and per-coordinate variance of one step."""

    mean: float
    variance: float


@dataclass(frozen=True)
class LimitResidual:
    """Overshoot-vs-SDE residuals at one step size."""

    eps: float
    mean_residual: float
    variance_residual: float
    variance_ratio: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def overshoot_step_moments(z: float, v: float, t: float, eps: float, c: float) -> StepMoments:
    """Exact moments of an unclamped overshoot step from t to t + eps."""
    coeffs = overshoot_coefficients(t, t + eps, c, clamp=False)
    return StepMoments(mean=coeffs.a * (z + (coeffs.o - t) * v), variance=coeffs.b**2)


def sde_step_moments(z: float, v: float, t: float, eps: float, c: float) -> StepMoments:
    """Euler-Maruyama moments of the limiting SDE over eps."""
    if t <= 0.0:
        raise DomainError("the limiting SDE is singular at t = 0")
    drift = (1.0 + c) * v - (c / t) * z
    return StepMoments(mean=z + eps * drift, variance=2.0 * c * (1.0 - t) * eps / t)


def sde_limit_residuals(
    z: float, v: float, t: float, eps_values: Sequence[float], c: float
) -> list[LimitResidual]:
    """Residuals of the overshoot step against the SDE for each step size."""
    residuals = []
    for eps in eps_values:
        exact = overshoot_step_moments(z, v, t, eps, c)
        limit = sde_step_moments(z, v, t, eps, c)
        residuals.append(
            LimitResidual(
                eps=float(eps),
                mean_residual=exact.mean - limit.mean,
                variance_residual=exact.variance - limit.variance,
                variance_ratio=exact.variance / limit.variance,
            )
        )
    return residuals


def fit_convergence_order(eps: Sequence[float], residuals: Sequence[float]) -> float:
    """Least-squares slope of log |residual| against log eps."""
    eps_arr = np.asarray(eps, dtype=np.float64)
    res_arr = np.abs(np.asarray(residuals, dtype=np.float64))
    if eps_arr.shape != res_arr.shape or eps_arr.size < 2:
        raise DomainError("need at least two (eps, residual) pairs")
    if np.any(eps_arr <= 0.0) or np.any(res_arr == 0.0):
        raise DomainError("step sizes and residuals must be nonzero")
    slope, _ = np.polyfit(np.log(eps_arr), np.log(res_arr), 1)
    return float(slope)


def monte_carlo_step_moments(
    z: float, v: float, t: float, eps: float, c: float, n_draws: int, rng: NoiseSource
) -> tuple[StepMoments, NDArray[np.float64]]:
    """
    Empirical moments of ``n_draws`` overshoot steps from the same state.

    Returns the moments and the raw draws.
    """
    cfg = OvershootConfig(c=c, clamp=False)
    z_batch = np.full((n_draws, 1), float(z))
    out = overshoot_step(ConstantVelocity([v]), z_batch, t, t + eps, cfg, rng)[:, 0]
    return StepMoments(mean=float(out.mean()), variance=float(out.var(ddof=1))), out
