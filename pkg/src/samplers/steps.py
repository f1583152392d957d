"""
Single-step updates shared by the samplers.

Every stochastic step draws one (B, d) block of standard normals per call,
whether or not the noise ends up multiplied by zero, so samplers with
different strengths stay coupled through common random numbers.
"""

import math

import numpy as np

from ..attention_mask.mask import AttentionMask, as_mask_vector
from ..rf_core.data_models import StateBatch
from ..rf_core.errors import DomainError
from ..rf_core.flow import score_from_velocity
from ..rf_core.noise import NoiseSource
from ..rf_core.velocity import VelocityField, evaluate_velocity
from .coefficients import check_step_times, overshoot_coefficients
from .config import OvershootConfig


def euler_step(
    v: VelocityField, z: StateBatch, t: float, s: float, step_index: int = 0
) -> StateBatch:
    """Z_s = Z_t + (s - t) v(Z_t, t)."""
    t, s = check_step_times(t, s)
    return z + (s - t) * evaluate_velocity(v, z, t, step_index)


def _compensate(z_o: StateBatch, a, b, noise: StateBatch) -> StateBatch:
    # b == 0 keeps a * z_o bit-exact (no signed-zero noise term)
    return np.where(np.asarray(b) > 0.0, a * z_o + b * noise, a * z_o)


def overshoot_step(
    v: VelocityField,
    z_t: StateBatch,
    t: float,
    s: float,
    cfg: OvershootConfig,
    rng: NoiseSource,
    step_index: int = 0,
) -> StateBatch:
    """
    Advance to o = min(s + c (s - t), 1), then map back to s.

    Returns a (z_t + (o - t) v(z_t, t)) + b xi. With c = 0 the result is the
    Euler step exactly.
    """
    coeffs = overshoot_coefficients(t, s, cfg.c, clamp=cfg.clamp)
    velocity = evaluate_velocity(v, z_t, t, step_index)
    z_o = z_t + (coeffs.o - t) * velocity
    noise = rng.normal(z_t.shape)
    if not cfg.noise_compensation:
        return z_o
    return _compensate(z_o, coeffs.a, coeffs.b, noise)


def amo_step(
    v: VelocityField,
    z_t: StateBatch,
    t: float,
    s: float,
    cfg: OvershootConfig,
    mask: AttentionMask,
    rng: NoiseSource,
    step_index: int = 0,
) -> StateBatch:
    """
    Overshoot with per-coordinate strength c * m_i.

    Coordinates with m_i = 0 take the Euler step exactly; m_i = 1 matches
    :func:`overshoot_step` bit for bit on the same noise stream.
    """
    m = as_mask_vector(mask, z_t.shape[1])
    coeffs = overshoot_coefficients(t, s, cfg.c, mask=m, clamp=cfg.clamp)
    velocity = evaluate_velocity(v, z_t, t, step_index)
    z_o = z_t + (coeffs.o - t) * velocity
    noise = rng.normal(z_t.shape)
    if not cfg.noise_compensation:
        return z_o
    return _compensate(z_o, coeffs.a, coeffs.b, noise)


def overshoot_correction(
    v: VelocityField,
    z: StateBatch,
    t: float,
    s: float,
    cfg: OvershootConfig,
    rng: NoiseSource,
    step_index: int = 0,
) -> StateBatch:
    """
    Local correction z + (overshoot_step - euler_step) at time t.

    The displacement approximates one Langevin step on the time-t marginal
    and vanishes exactly for c = 0.
    """
    stepped = overshoot_step(v, z, t, s, cfg, rng, step_index)
    euler = euler_step(v, z, t, s, step_index)
    return z + (stepped - euler)


def sde_step(
    v: VelocityField,
    z: StateBatch,
    t: float,
    s: float,
    c: float,
    rng: NoiseSource,
    step_index: int = 0,
) -> StateBatch:
    """
    Euler-Maruyama step of dZ = ((1 + c) v - (c / t) Z) dt + sqrt(2 c (1 - t) / t) dW.

    Drift and diffusion are singular at t = 0, where a pure Euler step is
    taken. c = 0 is the Euler step exactly.
    """
    t, s = check_step_times(t, s)
    noise = rng.normal(z.shape)
    velocity = evaluate_velocity(v, z, t, step_index)
    eps = s - t
    if t == 0.0 or c == 0.0:
        return z + eps * velocity
    drift = (1.0 + c) * velocity - (c / t) * z
    diffusion = math.sqrt(2.0 * (1.0 - t) * c / t)
    return z + eps * drift + diffusion * math.sqrt(eps) * noise


def langevin_corrector(
    v: VelocityField, z: StateBatch, t: float, alpha: float, rng: NoiseSource
) -> StateBatch:
    """
    One Langevin step z + alpha * score + sqrt(2 alpha) xi on the time-t marginal.

    The score comes from the velocity, so t must lie in (0, 1 - 1e-3].
    """
    if alpha < 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    score = score_from_velocity(v, z, t)
    noise = rng.normal(z.shape)
    return z + alpha * score + math.sqrt(2.0 * alpha) * noise
