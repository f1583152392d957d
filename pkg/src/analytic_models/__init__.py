"""
Closed-form oracles for Gaussian-mixture targets with a standard-normal source.
"""

from .factorized import FactorizedMixture, FactorizedVelocity
from .fitting import fit_mixture
from .mixture import (
    GaussianMixture,
    MarginalLaw,
    MixtureVelocity,
    analytic_score,
    analytic_velocity,
    marginal_at,
    sample_target,
)
from .presets import list_presets, load_mixture, load_preset

__all__ = [
    "FactorizedMixture",
    "FactorizedVelocity",
    "fit_mixture",
    "GaussianMixture",
    "MarginalLaw",
    "MixtureVelocity",
    "analytic_score",
    "analytic_velocity",
    "marginal_at",
    "sample_target",
    "list_presets",
    "load_mixture",
    "load_preset",
]
