"""
Attention-derived modulation masks and the providers samplers read them from.
"""

from .mask import (
    AttentionInputs,
    AttentionMask,
    AttentionPair,
    aggregate_and_rescale,
    as_mask_vector,
    mask_from_attention,
    raw_mask,
    token_softmax,
)
from .providers import (
    ConstantMaskProvider,
    MaskProvider,
    PerStepMaskProvider,
    StaticMaskProvider,
)
from .synthetic import SCENARIOS, default_block, synthetic_attention

__all__ = [
    "AttentionInputs",
    "AttentionMask",
    "AttentionPair",
    "aggregate_and_rescale",
    "as_mask_vector",
    "mask_from_attention",
    "raw_mask",
    "token_softmax",
    "ConstantMaskProvider",
    "MaskProvider",
    "PerStepMaskProvider",
    "StaticMaskProvider",
    "SCENARIOS",
    "default_block",
    "synthetic_attention",
]
