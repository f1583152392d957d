"""
Pytest configuration and shared fixtures.
"""

import numpy as np
import pytest

from src.analytic_models.mixture import GaussianMixture


@pytest.fixture
def rng_batches():
    """A pair of paired (x0, x1) batches of shape (16, 3)."""
    generator = np.random.default_rng(11)
    return generator.standard_normal((16, 3)), generator.standard_normal((16, 3))


@pytest.fixture
def standard_normal_2d():
    """pi_1 = N(0, I_2)."""
    return GaussianMixture(weights=[1.0], means=[[0.0, 0.0]], variances=[1.0])


@pytest.fixture
def shifted_gaussian_2d():
    """pi_1 = N((2, 0), I_2)."""
    return GaussianMixture(weights=[1.0], means=[[2.0, 0.0]], variances=[1.0])


@pytest.fixture
def two_component_1d():
    """Symmetric 1D mixture at +/-2."""
    return GaussianMixture(weights=[0.5, 0.5], means=[[-2.0], [2.0]], variances=[0.25, 0.25])


@pytest.fixture
def three_component_2d():
    """Asymmetric 2D mixture with unequal weights and variances."""
    return GaussianMixture(
        weights=[0.2, 0.5, 0.3],
        means=[[-2.0, 1.0], [1.5, 1.5], [0.5, -2.0]],
        variances=[0.3, 0.1, 0.6],
    )


@pytest.fixture
def mixtures(two_component_1d, three_component_2d, shifted_gaussian_2d):
    """Three mixtures used by identity sweeps."""
    return [two_component_1d, three_component_2d, shifted_gaussian_2d]
