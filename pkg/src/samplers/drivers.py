"""
Samplers that chain single steps over a time grid.

All drivers share the same contract: ``z0`` is validated, each step's state
is checked for finiteness (failures carry the step index), and the result is
a :class:`Trajectory` with one snapshot per grid time.
"""

from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import replace
from typing import Any, ClassVar

import numpy as np

from ..attention_mask.providers import MaskProvider
from ..rf_core.data_models import StateBatch, TimeGrid, check_state_batch
from ..rf_core.errors import DomainError, NonFiniteStateError
from ..rf_core.noise import NoiseSource
from ..rf_core.velocity import VelocityField
from ..shared_utilities import get_logger
from ..shared_utilities.telemetry import trace_function
from .config import OvershootConfig
from .steps import amo_step, euler_step, overshoot_correction, overshoot_step, sde_step
from .trajectory import Trajectory

logger = get_logger(__name__)

StepFn = Callable[[StateBatch, int, float, float], StateBatch]


def _run(grid: TimeGrid, z0: StateBatch, step: StepFn) -> Trajectory:
    z = check_state_batch(z0, "z0")
    states = [z.copy()]
    for k, t, s in grid.steps():
        z = step(z, k, t, s)
        if not np.all(np.isfinite(z)):
            raise NonFiniteStateError(f"non-finite state at t={s}", k)
        states.append(z)
    return Trajectory(grid=grid, states=tuple(states))


@trace_function("samplers.euler")
def euler_sample(v: VelocityField, grid: TimeGrid, z0: StateBatch) -> Trajectory:
    """Deterministic Euler integration of the flow ODE."""
    return _run(grid, z0, lambda z, k, t, s: euler_step(v, z, t, s, k))


@trace_function("samplers.overshoot")
def overshoot_sample(
    v: VelocityField,
    grid: TimeGrid,
    z0: StateBatch,
    cfg: OvershootConfig,
    rng: NoiseSource,
) -> Trajectory:
    """Overshoot sampler: one overshoot step per grid interval, N * B * d draws."""
    return _run(grid, z0, lambda z, k, t, s: overshoot_step(v, z, t, s, cfg, rng, k))


@trace_function("samplers.sde")
def sde_sample(
    v: VelocityField,
    grid: TimeGrid,
    z0: StateBatch,
    cfg: OvershootConfig,
    rng: NoiseSource,
) -> Trajectory:
    """Euler-Maruyama discretization of the limiting SDE of strength cfg.c."""
    return _run(grid, z0, lambda z, k, t, s: sde_step(v, z, t, s, cfg.c, rng, k))


@trace_function("samplers.multistep")
def multistep_overshoot_sample(
    v: VelocityField,
    grid: TimeGrid,
    z0: StateBatch,
    cfg: OvershootConfig,
    k_inner: int,
    rng: NoiseSource,
) -> Trajectory:
    """
    Per interval: ``k_inner`` corrections of strength c / k_inner at time t,
    then one Euler step.
    """
    if k_inner < 1:
        raise DomainError(f"k_inner must be >= 1, got {k_inner}")
    inner = replace(cfg, c=cfg.c / k_inner)

    def step(z: StateBatch, k: int, t: float, s: float) -> StateBatch:
        for _ in range(k_inner):
            z = overshoot_correction(v, z, t, s, inner, rng, k)
        return euler_step(v, z, t, s, k)

    return _run(grid, z0, step)


@trace_function("samplers.amo")
def amo_sample(
    v: VelocityField,
    grid: TimeGrid,
    z0: StateBatch,
    cfg: OvershootConfig,
    mask_provider: MaskProvider,
    rng: NoiseSource,
) -> Trajectory:
    """Attention-modulated overshoot with a mask fetched for every step."""
    return _run(
        grid,
        z0,
        lambda z, k, t, s: amo_step(v, z, t, s, cfg, mask_provider.mask_at(k, t, s), rng, k),
    )


class BaseSampler(ABC):
    """A named sampler with its configuration bound."""

    name: ClassVar[str] = "base"
    stochastic: ClassVar[bool] = True

    def __init__(self, cfg: OvershootConfig | None = None, **options: Any):
        self.cfg = cfg or OvershootConfig()
        self.options = options

    @abstractmethod
    def sample(
        self, v: VelocityField, grid: TimeGrid, z0: StateBatch, rng: NoiseSource
    ) -> Trajectory:
        """Run the sampler from ``z0`` over ``grid``."""
        pass

    def __repr__(self) -> str:
        return f"{type(self).__name__}(c={self.cfg.c})"


class EulerSampler(BaseSampler):
    """Deterministic baseline; ignores the noise source."""

    name = "euler"
    stochastic = False

    def sample(self, v, grid, z0, rng):
        return euler_sample(v, grid, z0)


class OvershootSampler(BaseSampler):
    name = "overshoot"

    def sample(self, v, grid, z0, rng):
        return overshoot_sample(v, grid, z0, self.cfg, rng)


class UncompensatedOvershootSampler(BaseSampler):
    """Overshoot without the rescale and re-noise back to s."""

    name = "overshoot-no-compensation"

    def sample(self, v, grid, z0, rng):
        cfg = replace(self.cfg, noise_compensation=False)
        return overshoot_sample(v, grid, z0, cfg, rng)


class SdeSampler(BaseSampler):
    name = "sde"

    def sample(self, v, grid, z0, rng):
        return sde_sample(v, grid, z0, self.cfg, rng)


class MultistepSampler(BaseSampler):
    """Options: ``k_inner`` (default 5)."""

    name = "multistep"

    def sample(self, v, grid, z0, rng):
        k_inner = int(self.options.get("k_inner", 5))
        return multistep_overshoot_sample(v, grid, z0, self.cfg, k_inner, rng)


class AmoSampler(BaseSampler):
    """Options: ``mask_provider`` (required)."""

    name = "amo"

    def sample(self, v, grid, z0, rng):
        provider = self.options.get("mask_provider")
        if provider is None:
            raise DomainError("the amo sampler needs a mask_provider option")
        return amo_sample(v, grid, z0, self.cfg, provider, rng)


SAMPLERS: dict[str, type[BaseSampler]] = {
    cls.name: cls
    for cls in (
        EulerSampler,
        OvershootSampler,
        UncompensatedOvershootSampler,
        SdeSampler,
        MultistepSampler,
        AmoSampler,
    )
}


class SamplerFactory:
    """Creates samplers by registry name."""

    def __init__(self):
        self._samplers: dict[str, type[BaseSampler]] = dict(SAMPLERS)

    def get_sampler(
        self, name: str, cfg: OvershootConfig | None = None, **options: Any
    ) -> BaseSampler:
        """Instantiate a registered sampler."""
        sampler_class = self._samplers.get(name)
        if sampler_class is None:
            raise DomainError(
                f"unknown sampler '{name}', available: {', '.join(self._samplers)}"
            )
        logger.debug("Creating sampler", sampler=name, c=cfg.c if cfg else None)
        return sampler_class(cfg, **options)

    def get_available_samplers(self) -> list[str]:
        """Registered sampler names."""
        return list(self._samplers.keys())
