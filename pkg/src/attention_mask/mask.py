"""
Modulation masks built from text-to-image cross attention.

For every text token the attention logits Q(text_i) . K(image_p) are
softmaxed over all image positions p; the per-token maps are summed, averaged
over the selected layer/head pairs and min-max rescaled to [0, 1].
Masks flatten row-major (h, then w), the coordinate order of grid states.
"""

import json
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.special import softmax

from ..rf_core.errors import MaskError
from ..shared_utilities.output_formatter import format_rows_csv

# Maps whose spread is below this fraction of their magnitude count as constant.
CONSTANT_SPREAD_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class AttentionMask:
    """An h x w map with entries in [0, 1]."""

    values: NDArray[np.float64]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise MaskError(f"mask must be a non-empty h x w array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise MaskError("mask entries must be finite")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise MaskError("mask entries must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def h(self) -> int:
        return int(self.values.shape[0])

    @property
    def w(self) -> int:
        return int(self.values.shape[1])

    @property
    def flat(self) -> NDArray[np.float64]:
        """Row-major vector of length h * w."""
        return self.values.reshape(-1)

    @classmethod
    def constant(cls, h: int, w: int, value: float) -> "AttentionMask":
        """Mask with every entry equal to ``value``."""
        return cls(np.full((h, w), float(value)))

    @classmethod
    def block(cls, h: int, w: int, block: Sequence[int]) -> "AttentionMask":
        """Indicator of rows [r0, r1) x cols [c0, c1)."""
        r0, r1, c0, c1 = check_block(h, w, block)
        values = np.zeros((h, w))
        values[r0:r1, c0:c1] = 1.0
        return cls(values)

    def binarize(self, threshold: float) -> "AttentionMask":
        """1 where the mask reaches ``threshold``, else 0."""
        return AttentionMask((self.values >= threshold).astype(np.float64))

    def mass_fraction(self, block: Sequence[int]) -> float:
        """Share of the total mask mass inside a block."""
        r0, r1, c0, c1 = check_block(self.h, self.w, block)
        total = float(self.values.sum())
        if total == 0.0:
            return 0.0
        return float(self.values[r0:r1, c0:c1].sum()) / total

    def to_dict(self) -> dict[str, Any]:
        """``{h, w, values}`` with row-major values."""
        return {"h": self.h, "w": self.w, "values": self.flat.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AttentionMask":
        """Inverse of :meth:`to_dict`."""
        try:
            h, w = int(data["h"]), int(data["w"])
            values = np.asarray(data["values"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as e:
            raise MaskError(f"invalid mask document: {e}") from e
        if values.size != h * w:
            raise MaskError(f"mask document has {values.size} values for {h}x{w}")
        return cls(values.reshape(h, w))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AttentionMask":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise MaskError(f"invalid mask JSON: {e}") from e

    def to_csv(self) -> str:
        """Heatmap rows (row, col, value)."""
        rows = [
            {"row": i, "col": j, "value": float(self.values[i, j])}
            for i in range(self.h)
            for j in range(self.w)
        ]
        return format_rows_csv(rows, ["row", "col", "value"])


@dataclass(frozen=True, eq=False)
class AttentionPair:
    """Text queries (n x d_k) and image keys ((h * w) x d_k) of one layer/head."""

    queries: NDArray[np.float64]
    keys: NDArray[np.float64]

    def __post_init__(self):
        queries = np.asarray(self.queries, dtype=np.float64)
        keys = np.asarray(self.keys, dtype=np.float64)
        if queries.ndim != 2 or keys.ndim != 2:
            raise MaskError("queries and keys must be two-dimensional")
        if queries.shape[0] < 1:
            raise MaskError("at least one text token is required")
        if queries.shape[1] != keys.shape[1]:
            raise MaskError(
                f"queries and keys must share d_k, got {queries.shape[1]} and {keys.shape[1]}"
            )
        if not (np.all(np.isfinite(queries)) and np.all(np.isfinite(keys))):
            raise MaskError("attention inputs must be finite")
        object.__setattr__(self, "queries", queries)
        object.__setattr__(self, "keys", keys)


@dataclass(frozen=True, eq=False)
class AttentionInputs:
    """Layer/head pairs over an h x w image grid."""

    pairs: tuple[AttentionPair, ...]
    h: int
    w: int

    def __post_init__(self):
        if not self.pairs:
            raise MaskError("at least one layer/head pair is required")
        for pair in self.pairs:
            if pair.keys.shape[0] != self.h * self.w:
                raise MaskError(
                    f"keys have {pair.keys.shape[0]} rows for a {self.h}x{self.w} grid"
                )
        object.__setattr__(self, "pairs", tuple(self.pairs))


def check_block(h: int, w: int, block: Sequence[int]) -> tuple[int, int, int, int]:
    """Validate a half-open block (r0, r1, c0, c1)."""
    if len(block) != 4:
        raise MaskError(f"block must be (r0, r1, c0, c1), got {block}")
    r0, r1, c0, c1 = (int(b) for b in block)
    if not (0 <= r0 < r1 <= h and 0 <= c0 < c1 <= w):
        raise MaskError(f"block {block} does not fit a {h}x{w} grid")
    return r0, r1, c0, c1


def token_softmax(pair: AttentionPair, temperature: float = 1.0) -> NDArray[np.float64]:
    """Per-token softmax over image positions, shape (n, h * w)."""
    if temperature <= 0.0:
        raise MaskError(f"temperature must be > 0, got {temperature}")
    logits = pair.queries @ pair.keys.T / temperature
    return softmax(logits, axis=1)


def raw_mask(pair: AttentionPair, h: int, w: int, temperature: float = 1.0) -> NDArray[np.float64]:
    """Sum over tokens of the per-token attention maps; entries sum to n."""
    if pair.keys.shape[0] != h * w:
        raise MaskError(f"keys have {pair.keys.shape[0]} rows for a {h}x{w} grid")
    return token_softmax(pair, temperature).sum(axis=0).reshape(h, w)


def aggregate_and_rescale(masks: Sequence[NDArray[np.float64]]) -> AttentionMask:
    """
    Mean over layer/head maps, then min-max rescale to [0, 1].

    A constant mean map rescales to all zeros.
    """
    if len(masks) == 0:
        raise MaskError("cannot aggregate an empty list of masks")
    shapes = {np.shape(m) for m in masks}
    if len(shapes) != 1:
        raise MaskError(f"masks must share a shape, got {sorted(shapes)}")

    mean = np.mean(np.stack([np.asarray(m, dtype=np.float64) for m in masks]), axis=0)
    lo, hi = float(mean.min()), float(mean.max())
    if hi - lo <= CONSTANT_SPREAD_RTOL * max(abs(hi), abs(lo)):
        return AttentionMask(np.zeros_like(mean))
    return AttentionMask(np.clip((mean - lo) / (hi - lo), 0.0, 1.0))


def mask_from_attention(
    inputs: AttentionInputs,
    temperature: float = 1.0,
    pair_indices: Sequence[int] | None = None,
) -> AttentionMask:
    """Aggregate the selected layer/head pairs (all by default) into a mask."""
    if pair_indices is None:
        selected = inputs.pairs
    else:
        try:
            selected = tuple(inputs.pairs[i] for i in pair_indices)
        except IndexError as e:
            raise MaskError(f"pair index out of range: {e}") from e
    return aggregate_and_rescale(
        [raw_mask(pair, inputs.h, inputs.w, temperature) for pair in selected]
    )


def as_mask_vector(mask: "AttentionMask | NDArray[np.float64]", dim: int) -> NDArray[np.float64]:
    """Flatten a mask for a d-dimensional state and check it fits."""
    if isinstance(mask, AttentionMask):
        values = mask.flat
    else:
        values = np.asarray(mask, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
            raise MaskError("mask entries must lie in [0, 1]")
    if values.shape[0] != dim:
        raise MaskError(f"mask has {values.shape[0]} entries for a state of dimension {dim}")
    return values
