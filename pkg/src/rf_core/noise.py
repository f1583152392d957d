"""
Seeded noise streams.

Every stream is a numpy ``Generator`` on the PCG64 bit generator seeded
through ``SeedSequence``. Normal draws fill arrays in C order, so a
``(B, d)`` request consumes draws row by row (batch row, then dimension).
"""

from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError

MAX_SEED = 2**64 - 1


def _child_seed(seed: int, key: Sequence[int]) -> int:
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class NoiseSource:
    """
    Single-owner standard-normal stream.

    Args:
        seed: 64-bit non-negative seed

    Two sources built from the same seed produce identical streams as long
    as they are asked for the same sequence of shapes.
    """

    def __init__(self, seed: int):
        if not 0 <= int(seed) <= MAX_SEED:
            raise DomainError(f"seed must be a 64-bit non-negative integer, got {seed}")
        self.seed = int(seed)
        self._generator = np.random.default_rng(self.seed)
        self.draws = 0

    @property
    def generator(self) -> np.random.Generator:
        """Underlying generator, for non-normal draws (categorical, uniform)."""
        return self._generator

    def normal(self, shape: int | tuple[int, ...]) -> NDArray[np.float64]:
        """Draw standard normals of the given shape."""
        out = self._generator.standard_normal(size=shape)
        self.draws += int(out.size)
        return out

    def spawn(self, worker_index: int) -> "NoiseSource":
        """Child source for a parallel worker; depends only on (seed, worker_index)."""
        if worker_index < 0:
            raise DomainError(f"worker_index must be >= 0, got {worker_index}")
        return NoiseSource(_child_seed(self.seed, (worker_index,)))

    def __repr__(self) -> str:
        return f"NoiseSource(seed={self.seed}, draws={self.draws})"
