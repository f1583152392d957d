"""
Euler, overshoot, SDE, multi-step and attention-modulated samplers.
"""

from .coefficients import StepCoefficients, overshoot_coefficients, overshoot_time
from .config import DEFAULT_STEPS, OVERSHOOT_STRENGTH_PRESETS, OvershootConfig
from .drivers import (
    SAMPLERS,
    BaseSampler,
    SamplerFactory,
    amo_sample,
    euler_sample,
    multistep_overshoot_sample,
    overshoot_sample,
    sde_sample,
)
from .sde_limit import fit_convergence_order, sde_limit_residuals
from .steps import (
    amo_step,
    euler_step,
    langevin_corrector,
    overshoot_correction,
    overshoot_step,
    sde_step,
)
from .trajectory import Trajectory

__all__ = [
    "StepCoefficients",
    "overshoot_coefficients",
    "overshoot_time",
    "DEFAULT_STEPS",
    "OVERSHOOT_STRENGTH_PRESETS",
    "OvershootConfig",
    "SAMPLERS",
    "BaseSampler",
    "SamplerFactory",
    "amo_sample",
    "euler_sample",
    "multistep_overshoot_sample",
    "overshoot_sample",
    "sde_sample",
    "fit_convergence_order",
    "sde_limit_residuals",
    "amo_step",
    "euler_step",
    "langevin_corrector",
    "overshoot_correction",
    "overshoot_step",
    "sde_step",
    "Trajectory",
]
