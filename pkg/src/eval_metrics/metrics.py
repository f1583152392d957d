"""
Distributional distances and tests between sample batches and closed-form laws.

Energy distance is the V-statistic 2 E|X - Y| - E|X - X'| - E|Y - Y'|, so a
batch compared with itself scores exactly 0. Pairwise distances are summed
in row blocks to bound memory on 10^4 x 10^4 comparisons.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Protocol

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import cdist

from ..rf_core.errors import MetricError
from ..rf_core.noise import NoiseSource

BLOCK_ROWS = 1024
MOMENT_GATE_SE = 4.0
ENERGY_TEST_ALPHA = 0.01


@dataclass
class MetricReport:
    """
    One metric evaluation.

    ``passed`` is None when the metric carries no gate or is inconclusive.
    """

    metric: str
    value: float | None
    standard_error: float | None = None
    n_a: int | None = None
    n_b: int | None = None
    seed: int | None = None
    passed: bool | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return asdict(self)


class MomentLaw(Protocol):
    """Anything with closed-form first and second moments."""

    @property
    def dim(self) -> int: ...

    def mean(self) -> NDArray[np.float64]: ...

    def covariance(self) -> NDArray[np.float64]: ...


def _check_batch(x, name: str) -> NDArray[np.float64]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise MetricError(f"{name} must be a non-empty (n, d) batch, got shape {arr.shape}")
    return arr


def _check_pair(a, b) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    a, b = _check_batch(a, "a"), _check_batch(b, "b")
    if a.shape[1] != b.shape[1]:
        raise MetricError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return a, b


def mean_pairwise_distance(
    a: NDArray[np.float64], b: NDArray[np.float64], block_rows: int = BLOCK_ROWS
) -> float:
    """Mean Euclidean distance over all (a_i, b_j) pairs."""
    total = 0.0
    for start in range(0, a.shape[0], block_rows):
        total += float(cdist(a[start : start + block_rows], b).sum())
    return total / (a.shape[0] * b.shape[0])


def energy_distance(a, b, block_rows: int = BLOCK_ROWS) -> MetricReport:
    """Two-sample energy distance between batches of equal dimension."""
    a, b = _check_pair(a, b)
    cross = mean_pairwise_distance(a, b, block_rows)
    within_a = mean_pairwise_distance(a, a, block_rows)
    within_b = mean_pairwise_distance(b, b, block_rows)
    value = max(2.0 * cross - within_a - within_b, 0.0)
    return MetricReport(
        metric="energy_distance",
        value=value,
        n_a=a.shape[0],
        n_b=b.shape[0],
        details={"cross": cross, "within_a": within_a, "within_b": within_b},
    )


def wasserstein2_1d(x: NDArray[np.float64], y: NDArray[np.float64]) -> float:
    """
    W2 between two 1D empirical laws.

    Quantile functions are piecewise constant; for unequal sizes they are
    compared on the merged grid of levels k / n_x and j / n_y.
    """
    qx, qy = np.sort(x), np.sort(y)
    nx, ny = qx.shape[0], qy.shape[0]
    if nx == ny:
        return float(np.sqrt(np.mean((qx - qy) ** 2)))

    levels = np.union1d(np.arange(1, nx + 1) / nx, np.arange(1, ny + 1) / ny)
    widths = np.diff(levels, prepend=0.0)
    mid = levels - 0.5 * widths
    ix = np.minimum((mid * nx).astype(np.int64), nx - 1)
    iy = np.minimum((mid * ny).astype(np.int64), ny - 1)
    return float(np.sqrt(np.sum(widths * (qx[ix] - qy[iy]) ** 2)))


def sliced_wasserstein(a, b, n_projections: int, rng: NoiseSource) -> MetricReport:
    """
    Mean over random unit directions of the projected 1D W2 distance.

    Directions are normalized standard-normal draws from ``rng``.
    """
    a, b = _check_pair(a, b)
    if n_projections < 1:
        raise MetricError(f"n_projections must be >= 1, got {n_projections}")

    directions = rng.normal((n_projections, a.shape[1]))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    per_direction = np.array(
        [wasserstein2_1d(a @ u, b @ u) for u in directions], dtype=np.float64
    )
    se = (
        float(per_direction.std(ddof=1) / np.sqrt(n_projections))
        if n_projections > 1
        else None
    )
    return MetricReport(
        metric="sliced_wasserstein",
        value=float(per_direction.mean()),
        standard_error=se,
        n_a=a.shape[0],
        n_b=b.shape[0],
        seed=rng.seed,
        details={"n_projections": n_projections},
    )


def moment_test(
    batch,
    law: MomentLaw,
    threshold: float = MOMENT_GATE_SE,
    covariance: str = "full",
) -> MetricReport:
    """
    Mean and covariance z-scores of ``batch`` against a closed-form law.

    Mean standard errors come from the law's variances; covariance standard
    errors from the empirical fourth moments. ``covariance="diagonal"``
    gates only variances (for high-dimensional grid states). A batch of
    one point is inconclusive.
    """
    x = _check_batch(batch, "batch")
    n, d = x.shape
    if d != law.dim:
        raise MetricError(f"batch dimension {d} does not match law dimension {law.dim}")
    if covariance not in ("full", "diagonal"):
        raise MetricError(f"covariance must be 'full' or 'diagonal', got {covariance}")
    if n < 2:
        return MetricReport(
            metric="moment_test",
            value=None,
            n_a=n,
            passed=None,
            details={"reason": "standard errors undefined for n < 2", "threshold": threshold},
        )

    mu = law.mean()
    sigma = law.covariance()
    mean_z = (x.mean(axis=0) - mu) / np.sqrt(np.diag(sigma) / n)

    centered = x - x.mean(axis=0)
    if covariance == "full":
        rows, cols = np.triu_indices(d)
    else:
        rows = cols = np.arange(d)
    products = centered[:, rows] * centered[:, cols]
    sample_cov = products.sum(axis=0) / (n - 1)
    cov_se = products.std(axis=0, ddof=1) / np.sqrt(n)
    diff = sample_cov - sigma[rows, cols]
    with np.errstate(divide="ignore", invalid="ignore"):
        cov_z = np.where(cov_se > 0.0, diff / cov_se, np.where(diff == 0.0, 0.0, np.inf))

    worst = float(max(np.max(np.abs(mean_z)), np.max(np.abs(cov_z))))
    return MetricReport(
        metric="moment_test",
        value=worst,
        n_a=n,
        passed=worst <= threshold,
        details={
            "threshold": threshold,
            "mean_z": mean_z.tolist(),
            "cov_z": cov_z.tolist(),
            "covariance": covariance,
        },
    )


def energy_test(
    a,
    b,
    rng: NoiseSource,
    n_permutations: int = 200,
    max_samples: int = 500,
    alpha: float = ENERGY_TEST_ALPHA,
) -> MetricReport:
    """
    Permutation test of equal distributions using the energy statistic.

    Each batch is subsampled to ``max_samples`` rows; the p-value is
    (1 + #{permuted >= observed}) / (1 + n_permutations).
    """
    a, b = _check_pair(a, b)
    if n_permutations < 1:
        raise MetricError(f"n_permutations must be >= 1, got {n_permutations}")
    generator = rng.generator
    if a.shape[0] > max_samples:
        a = a[generator.choice(a.shape[0], size=max_samples, replace=False)]
    if b.shape[0] > max_samples:
        b = b[generator.choice(b.shape[0], size=max_samples, replace=False)]

    pooled = np.vstack([a, b])
    distances = cdist(pooled, pooled)
    n_a = a.shape[0]

    def statistic(order: NDArray[np.int64]) -> float:
        ia, ib = order[:n_a], order[n_a:]
        return float(
            2.0 * distances[np.ix_(ia, ib)].mean()
            - distances[np.ix_(ia, ia)].mean()
            - distances[np.ix_(ib, ib)].mean()
        )

    identity = np.arange(pooled.shape[0])
    observed = statistic(identity)
    exceed = sum(
        statistic(generator.permutation(identity)) >= observed for _ in range(n_permutations)
    )
    p_value = (1.0 + exceed) / (1.0 + n_permutations)
    return MetricReport(
        metric="energy_test",
        value=observed,
        n_a=n_a,
        n_b=b.shape[0],
        seed=rng.seed,
        passed=p_value >= alpha,
        details={"p_value": p_value, "alpha": alpha, "n_permutations": n_permutations},
    )
