"""
Distances and statistical tests between sample batches and oracle laws.
"""

from .metrics import (
    MetricReport,
    energy_distance,
    energy_test,
    mean_pairwise_distance,
    moment_test,
    sliced_wasserstein,
    wasserstein2_1d,
)

__all__ = [
    "MetricReport",
    "energy_distance",
    "energy_test",
    "mean_pairwise_distance",
    "moment_test",
    "sliced_wasserstein",
    "wasserstein2_1d",
]
