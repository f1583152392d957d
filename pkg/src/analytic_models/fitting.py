"""
Mixture presets fitted by expectation-maximization.
"""

import numpy as np
from numpy.typing import NDArray
from sklearn.datasets import make_moons
from sklearn.mixture import GaussianMixture as SklearnGaussianMixture

from ..rf_core.errors import InvariantViolationError
from ..shared_utilities import get_logger
from .mixture import GaussianMixture

logger = get_logger(__name__)

POINT_SOURCES = ("moons",)


def fit_mixture(points: NDArray[np.float64], n_components: int, seed: int) -> GaussianMixture:
    """
    Fit an isotropic mixture to ``points`` with spherical EM.

    Args:
        points: (n, d) training points
        n_components: Fixed number of components K
        seed: Seed for the k-means initialization
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < n_components:
        raise InvariantViolationError(
            f"need at least {n_components} points of shape (n, d), got {points.shape}"
        )

    model = SklearnGaussianMixture(
        n_components=n_components,
        covariance_type="spherical",
        random_state=seed,
        max_iter=500,
        tol=1e-6,
    )
    model.fit(points)
    logger.debug(
        "Fitted mixture",
        n_components=n_components,
        converged=bool(model.converged_),
        iterations=int(model.n_iter_),
    )

    weights = np.asarray(model.weights_, dtype=np.float64)
    return GaussianMixture(
        weights=weights / weights.sum(),
        means=model.means_,
        variances=model.covariances_,
    )


def generate_points(source: str, n_samples: int, noise: float, seed: int) -> NDArray[np.float64]:
    """Toy point clouds that presets can be fitted to."""
    if source == "moons":
        points, _ = make_moons(n_samples=n_samples, noise=noise, random_state=seed)
        return np.asarray(points, dtype=np.float64)
    raise InvariantViolationError(
        f"unknown point source '{source}', expected one of {POINT_SOURCES}"
    )


def fit_from_recipe(recipe: dict) -> GaussianMixture:
    """Build a fitted preset from its ``fit`` recipe."""
    points = generate_points(
        recipe["source"],
        int(recipe["n_samples"]),
        float(recipe.get("noise", 0.0)),
        int(recipe.get("seed", 0)),
    )
    points = float(recipe.get("scale", 1.0)) * (
        points + np.asarray(recipe.get("shift", 0.0), dtype=np.float64)
    )
    return fit_mixture(points, int(recipe["n_components"]), int(recipe.get("seed", 0)))
