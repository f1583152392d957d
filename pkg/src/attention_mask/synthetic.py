"""
Synthetic query/key generators standing in for transformer cross attention.

Keys of highlighted image positions and the text queries share a strong
direction, so the induced attention concentrates on those positions; all
other components are small Gaussian jitter.
"""

from collections.abc import Sequence

import numpy as np

from ..rf_core.errors import MaskError
from ..rf_core.noise import NoiseSource
from .mask import AttentionInputs, AttentionPair, check_block

SCENARIOS = ("focused-block", "diffuse", "multi-region")

DEFAULT_KEY_DIM = 8
DEFAULT_STRENGTH = 3.0
DEFAULT_JITTER = 0.05


def default_block(h: int, w: int) -> tuple[int, int, int, int]:
    """Central block covering half of each axis; (2, 6, 2, 6) on 8x8."""
    r0, c0 = h // 4, w // 4
    return r0, r0 + max(1, h // 2), c0, c0 + max(1, w // 2)


def default_regions(h: int, w: int) -> list[tuple[int, int, int, int]]:
    """Two opposite corner blocks."""
    rh, rw = max(1, (h + 1) // 3), max(1, (w + 1) // 3)
    return [(0, rh, 0, rw), (h - rh, h, w - rw, w)]


def _region_index(h: int, w: int, regions: Sequence[Sequence[int]]) -> np.ndarray:
    """Region id per row-major position, -1 outside every region."""
    index = np.full((h, w), -1, dtype=np.int64)
    for r, block in enumerate(regions):
        r0, r1, c0, c1 = check_block(h, w, block)
        index[r0:r1, c0:c1] = r
    return index.reshape(-1)


def _pair(
    regions_of_positions: np.ndarray,
    token_regions: Sequence[int],
    d_k: int,
    strength: float,
    jitter: float,
    rng: NoiseSource,
) -> AttentionPair:
    n = len(token_regions)
    queries = jitter * rng.normal((n, d_k))
    for i, r in enumerate(token_regions):
        if r >= 0:
            queries[i, r] += strength
    keys = jitter * rng.normal((regions_of_positions.shape[0], d_k))
    for p, r in enumerate(regions_of_positions):
        if r >= 0:
            keys[p, r] += strength
    return AttentionPair(queries=queries, keys=keys)


def synthetic_attention(
    scenario: str,
    h: int,
    w: int,
    n: int,
    rng: NoiseSource,
    n_pairs: int = 4,
    d_k: int = DEFAULT_KEY_DIM,
    strength: float = DEFAULT_STRENGTH,
    jitter: float = DEFAULT_JITTER,
    block: Sequence[int] | None = None,
    regions: Sequence[Sequence[int]] | None = None,
) -> AttentionInputs:
    """
    Generate ``n_pairs`` layer/head pairs for a named scenario.

    Scenarios:
        focused-block: every token attends to one block (``block``)
        diffuse: no shared direction; near-uniform attention
        multi-region: token i attends to region i mod R (``regions``)

    Raises:
        MaskError: unknown scenario, n < 1, or blocks outside the grid
    """
    if scenario not in SCENARIOS:
        raise MaskError(f"unknown scenario '{scenario}', expected one of {SCENARIOS}")
    if n < 1:
        raise MaskError(f"at least one text token is required, got n={n}")
    if h < 1 or w < 1 or n_pairs < 1:
        raise MaskError(f"invalid grid {h}x{w} or n_pairs={n_pairs}")

    if scenario == "focused-block":
        chosen = [tuple(block) if block is not None else default_block(h, w)]
        token_regions = [0] * n
    elif scenario == "multi-region":
        chosen = [tuple(r) for r in regions] if regions is not None else default_regions(h, w)
        token_regions = [i % len(chosen) for i in range(n)]
    else:
        chosen = []
        token_regions = [-1] * n

    if len(chosen) > d_k:
        raise MaskError(f"{len(chosen)} regions need d_k >= {len(chosen)}, got {d_k}")

    positions = _region_index(h, w, chosen)
    pairs = tuple(
        _pair(positions, token_regions, d_k, strength, jitter, rng) for _ in range(n_pairs)
    )
    return AttentionInputs(pairs=pairs, h=h, w=w)
