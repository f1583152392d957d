"""
Isotropic Gaussian mixtures and their closed-form rectified-flow oracles.

With a standard-normal source the time-t law of X_t = t X1 + (1 - t) X0 is
again a mixture: component weights are unchanged, means become t mu_k and
variances t^2 sigma_k^2 + (1 - t)^2. Density, score and the conditional
velocity E[X1 - X0 | X_t = x] follow per component and are combined with
responsibilities computed in log space.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp, softmax

from ..rf_core.data_models import StateBatch
from ..rf_core.errors import DomainError, InvariantViolationError, ShapeMismatchError
from ..rf_core.noise import NoiseSource

WEIGHT_SUM_ATOL = 1e-12
_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """
    Weighted sum of isotropic Gaussians N(mu_k, sigma_k^2 I).

    Args:
        weights: K nonnegative weights summing to 1
        means: K x d component means
        variances: K positive per-component variances
    """

    weights: NDArray[np.float64]
    means: NDArray[np.float64]
    variances: NDArray[np.float64]

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64).reshape(-1)
        means = np.array(self.means, dtype=np.float64)
        variances = np.array(self.variances, dtype=np.float64).reshape(-1)
        if means.ndim == 1:
            means = means[:, None]

        k = weights.shape[0]
        if k < 1:
            raise InvariantViolationError("a mixture needs at least one component")
        if means.ndim != 2 or means.shape[0] != k or variances.shape[0] != k:
            raise InvariantViolationError(
                f"inconsistent mixture shapes: weights {weights.shape}, "
                f"means {means.shape}, variances {variances.shape}"
            )
        if means.shape[1] < 1:
            raise InvariantViolationError("mixture dimension must be >= 1")
        if np.any(weights < 0.0) or abs(float(weights.sum()) - 1.0) > WEIGHT_SUM_ATOL:
            raise InvariantViolationError(
                f"weights must be nonnegative and sum to 1, got sum {weights.sum()!r}"
            )
        if np.any(variances <= 0.0):
            raise InvariantViolationError("variances must be positive")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(variances))):
            raise InvariantViolationError("mixture parameters must be finite")

        for name, value in (("weights", weights), ("means", means), ("variances", variances)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def dim(self) -> int:
        """Dimension d of the ambient space."""
        return int(self.means.shape[1])

    @property
    def n_components(self) -> int:
        """Number of components K."""
        return int(self.weights.shape[0])

    def _check_points(self, x) -> StateBatch:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ShapeMismatchError(
                f"expected points of shape (B, {self.dim}), got {x.shape}"
            )
        return x

    def _log_joint(self, x: StateBatch) -> NDArray[np.float64]:
        """log w_k + log N(x; mu_k, sigma_k^2 I) as a (B, K) array."""
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        sq = ((x[:, None, :] - self.means[None, :, :]) ** 2).sum(axis=2)
        return (
            log_w[None, :]
            - 0.5 * self.dim * (_LOG_2PI + np.log(self.variances))[None, :]
            - 0.5 * sq / self.variances[None, :]
        )

    def log_density(self, x) -> NDArray[np.float64]:
        """Log density at each row of ``x``."""
        return logsumexp(self._log_joint(self._check_points(x)), axis=1)

    def density(self, x) -> NDArray[np.float64]:
        """Density at each row of ``x``."""
        return np.exp(self.log_density(x))

    def responsibilities(self, x) -> NDArray[np.float64]:
        """Posterior component probabilities, (B, K)."""
        return softmax(self._log_joint(self._check_points(x)), axis=1)

    def score(self, x) -> StateBatch:
        """Gradient of the log density."""
        x = self._check_points(x)
        resp = softmax(self._log_joint(x), axis=1)
        per_component = -(x[:, None, :] - self.means[None, :, :]) / self.variances[
            None, :, None
        ]
        return np.einsum("bk,bkd->bd", resp, per_component)

    def mean(self) -> NDArray[np.float64]:
        """Mixture mean."""
        return self.weights @ self.means

    def covariance(self) -> NDArray[np.float64]:
        """Mixture covariance."""
        mu = self.mean()
        second = np.einsum("k,ki,kj->ij", self.weights, self.means, self.means)
        second += float(self.weights @ self.variances) * np.eye(self.dim)
        return second - np.outer(mu, mu)

    def sample(self, n: int, rng: NoiseSource) -> StateBatch:
        """
        Draw ``n`` points: a categorical component, then a Gaussian.

        Components are drawn first (one categorical per point), then an
        (n, d) block of standard normals.
        """
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        components = rng.generator.choice(self.n_components, size=n, p=self.weights)
        noise = rng.normal((n, self.dim))
        return self.means[components] + np.sqrt(self.variances[components])[:, None] * noise

    def to_dict(self) -> dict[str, Any]:
        """Convert to the preset document form."""
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GaussianMixture":
        """Create from ``{weights, means, variances}``."""
        try:
            return cls(
                weights=data["weights"], means=data["means"], variances=data["variances"]
            )
        except KeyError as e:
            raise InvariantViolationError(f"mixture document missing {e}") from e


@dataclass(frozen=True, eq=False)
class MarginalLaw(GaussianMixture):
    """The time-t law of the interpolation path, itself a Gaussian mixture."""

    time: float = field(default=1.0)


def _check_time(t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    return t


def marginal_at(gm: GaussianMixture, t: float) -> MarginalLaw:
    """Law of X_t: means t mu_k, variances t^2 sigma_k^2 + (1 - t)^2."""
    t = _check_time(t)
    return MarginalLaw(
        weights=gm.weights,
        means=t * gm.means,
        variances=t * t * gm.variances + (1.0 - t) ** 2,
        time=t,
    )


def analytic_score(gm: GaussianMixture, x, t: float) -> StateBatch:
    """Exact score of the time-t marginal, for t in [0, 1)."""
    t = _check_time(t)
    if t >= 1.0:
        raise DomainError("analytic_score requires t < 1")
    return marginal_at(gm, t).score(x)


class MixtureVelocity:
    """
    Exact rectified-flow velocity of a Gaussian-mixture target.

    Per component k, with s_k = t^2 sigma_k^2 + (1 - t)^2,
    E[X1 - X0 | x, k] = mu_k + ((t sigma_k^2 - (1 - t)) / s_k) (x - t mu_k);
    components are weighted by their responsibilities under the time-t law.
    """

    def __init__(self, gm: GaussianMixture):
        self.gm = gm

    def __call__(self, x, t) -> StateBatch:
        gm = self.gm
        x = gm._check_points(x)
        batch = x.shape[0]
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
            raise DomainError("velocity times must lie in [0, 1]")
        if t_arr.ndim == 0:
            tt = np.full((batch, 1), float(t_arr))
        elif t_arr.shape == (batch,):
            tt = t_arr[:, None]
        else:
            raise ShapeMismatchError(
                f"times must be a scalar or shape ({batch},), got {t_arr.shape}"
            )

        var = gm.variances[None, :]
        s = tt * tt * var + (1.0 - tt) ** 2
        centered = x[:, None, :] - tt[:, :, None] * gm.means[None, :, :]

        with np.errstate(divide="ignore"):
            log_w = np.log(gm.weights)
        log_joint = (
            log_w[None, :]
            - 0.5 * gm.dim * (_LOG_2PI + np.log(s))
            - 0.5 * (centered**2).sum(axis=2) / s
        )
        resp = softmax(log_joint, axis=1)

        gain = (tt * var - (1.0 - tt)) / s
        conditional = gm.means[None, :, :] + gain[:, :, None] * centered
        return np.einsum("bk,bkd->bd", resp, conditional)

    def __repr__(self) -> str:
        return f"MixtureVelocity(K={self.gm.n_components}, d={self.gm.dim})"


def analytic_velocity(gm: GaussianMixture) -> MixtureVelocity:
    """Exact velocity field for ``gm`` with a standard-normal source."""
    return MixtureVelocity(gm)


def sample_target(gm, n: int, rng: NoiseSource) -> StateBatch:
    """``n`` i.i.d. draws from the target."""
    return gm.sample(n, rng)
