"""
Mask providers: where a sampler gets the mask for each step.
"""

from abc import ABC, abstractmethod
from typing import Any

from ..rf_core.noise import NoiseSource
from ..shared_utilities import get_logger
from .mask import AttentionMask, mask_from_attention
from .synthetic import synthetic_attention

logger = get_logger(__name__)


class MaskProvider(ABC):
    """Supplies the attention mask used for the step from t to s."""

    @abstractmethod
    def mask_at(self, step_index: int, t: float, s: float) -> AttentionMask:
        """Mask for step ``step_index``."""
        pass


class StaticMaskProvider(MaskProvider):
    """The same mask at every step."""

    def __init__(self, mask: AttentionMask):
        self.mask = mask

    def mask_at(self, step_index: int, t: float, s: float) -> AttentionMask:
        return self.mask


class ConstantMaskProvider(StaticMaskProvider):
    """Uniform mask; 0 reduces AMO to Euler and 1 to scalar overshoot."""

    def __init__(self, h: int, w: int, value: float):
        super().__init__(AttentionMask.constant(h, w, value))


class PerStepMaskProvider(MaskProvider):
    """
    Regenerates synthetic attention for every step.

    The attention inputs of step k come from ``NoiseSource(seed).spawn(k)``,
    so the mask sequence depends only on (seed, step).
    """

    def __init__(
        self,
        scenario: str,
        h: int,
        w: int,
        n_tokens: int,
        seed: int,
        temperature: float = 1.0,
        binarize_threshold: float | None = None,
        **scenario_options: Any,
    ):
        self.scenario = scenario
        self.h = h
        self.w = w
        self.n_tokens = n_tokens
        self.temperature = temperature
        self.binarize_threshold = binarize_threshold
        self.scenario_options = scenario_options
        self._root = NoiseSource(seed)

    def mask_at(self, step_index: int, t: float, s: float) -> AttentionMask:
        inputs = synthetic_attention(
            self.scenario,
            self.h,
            self.w,
            self.n_tokens,
            self._root.spawn(step_index),
            **self.scenario_options,
        )
        mask = mask_from_attention(inputs, self.temperature)
        if self.binarize_threshold is not None:
            mask = mask.binarize(self.binarize_threshold)
        logger.debug("Per-step mask", step=step_index, coverage=float(mask.values.mean()))
        return mask
