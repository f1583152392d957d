"""
Grid-state targets: every coordinate an independent copy of a 1D mixture.

A d = h * w state behaves like d independent 1D problems, so velocity and
score are evaluated by folding the batch to (B * d, 1) and applying the 1D
oracle coordinatewise.
"""

import numpy as np
from numpy.typing import NDArray

from ..rf_core.data_models import StateBatch
from ..rf_core.errors import DomainError, InvariantViolationError, ShapeMismatchError
from ..rf_core.noise import NoiseSource
from .mixture import GaussianMixture, MixtureVelocity, marginal_at


class FactorizedMixture:
    """
    Product of ``dim`` identical 1D mixtures.

    Args:
        base: One-dimensional mixture shared by every coordinate
        dim: Number of coordinates
    """

    def __init__(self, base: GaussianMixture, dim: int):
        if base.dim != 1:
            raise InvariantViolationError(f"base mixture must be 1D, got d={base.dim}")
        if dim < 1:
            raise InvariantViolationError(f"dim must be >= 1, got {dim}")
        self.base = base
        self.dim = int(dim)

    def _fold(self, x) -> tuple[StateBatch, tuple[int, int]]:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ShapeMismatchError(
                f"expected points of shape (B, {self.dim}), got {x.shape}"
            )
        return x.reshape(-1, 1), x.shape

    def velocity(self) -> "FactorizedVelocity":
        """Exact velocity field of the product target."""
        return FactorizedVelocity(self)

    def score(self, x, t: float) -> StateBatch:
        """Score of the time-t product law."""
        folded, shape = self._fold(x)
        return marginal_at(self.base, t).score(folded).reshape(shape)

    def log_density(self, x) -> NDArray[np.float64]:
        """Sum of per-coordinate log densities."""
        folded, shape = self._fold(x)
        return self.base.log_density(folded).reshape(shape).sum(axis=1)

    def marginal_at(self, t: float) -> "FactorizedMixture":
        """Time-t law; still a product of identical 1D mixtures."""
        return FactorizedMixture(marginal_at(self.base, t), self.dim)

    def mean(self) -> NDArray[np.float64]:
        """Mean vector."""
        return np.full(self.dim, float(self.base.mean()[0]))

    def covariance(self) -> NDArray[np.float64]:
        """Diagonal covariance."""
        return float(self.base.covariance()[0, 0]) * np.eye(self.dim)

    def sample(self, n: int, rng: NoiseSource) -> StateBatch:
        """``n`` draws; coordinates are filled row-major from one 1D stream."""
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        return self.base.sample(n * self.dim, rng).reshape(n, self.dim)

    def __repr__(self) -> str:
        return f"FactorizedMixture(K={self.base.n_components}, dim={self.dim})"


class FactorizedVelocity:
    """Coordinatewise application of a 1D mixture velocity."""

    def __init__(self, target: FactorizedMixture):
        self.target = target
        self._base_velocity = MixtureVelocity(target.base)

    def __call__(self, x, t) -> StateBatch:
        folded, shape = self.target._fold(x)
        t_arr = np.asarray(t, dtype=np.float64)
        if t_arr.ndim == 1:
            t_arr = np.repeat(t_arr, shape[1])
        return self._base_velocity(folded, t_arr).reshape(shape)
