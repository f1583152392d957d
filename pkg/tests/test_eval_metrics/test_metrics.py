"""Tests for distributional distances and tests."""

import numpy as np
import pytest

from src.analytic_models.mixture import GaussianMixture
from src.eval_metrics.metrics import (
    MetricReport,
    energy_distance,
    energy_test,
    mean_pairwise_distance,
    moment_test,
    sliced_wasserstein,
    wasserstein2_1d,
)
from src.rf_core.errors import MetricError
from src.rf_core.noise import NoiseSource


def _normal(n: int, d: int, seed: int, scale: float = 1.0, shift: float = 0.0) -> np.ndarray:
    return shift + scale * NoiseSource(seed).normal((n, d))


class TestEnergyDistance:
    """Test energy_distance."""

    def test_self_distance_is_zero(self):
        """A batch against itself scores exactly 0."""
        a = _normal(300, 2, 0)
        assert energy_distance(a, a).value == 0.0

    def test_singletons(self):
        """Two points at distance r score 2r."""
        report = energy_distance(np.array([[0.0, 0.0]]), np.array([[3.0, 4.0]]))
        assert report.value == pytest.approx(10.0)
        assert (report.n_a, report.n_b) == (1, 1)

    def test_grows_with_shift(self):
        """Larger location shifts give larger distances."""
        a = _normal(500, 2, 0)
        near = energy_distance(a, _normal(500, 2, 1, shift=0.5)).value
        far = energy_distance(a, _normal(500, 2, 1, shift=2.0)).value
        assert 0.0 < near < far

    def test_block_size_does_not_matter(self):
        """Row blocking only changes the summation grouping."""
        a, b = _normal(100, 3, 0), _normal(80, 3, 1)
        assert energy_distance(a, b, block_rows=7).value == pytest.approx(
            energy_distance(a, b).value, rel=1e-12
        )

    def test_one_dimensional_input(self):
        """1-D arrays are treated as (n, 1) batches."""
        report = energy_distance(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        assert report.value == 0.0

    def test_validation(self):
        """Empty batches and dimension mismatches raise."""
        with pytest.raises(MetricError):
            energy_distance(np.zeros((0, 2)), np.zeros((3, 2)))
        with pytest.raises(MetricError):
            energy_distance(np.zeros((3, 2)), np.zeros((3, 3)))

    def test_mean_pairwise_distance(self):
        """Mean over every cross pair."""
        a = np.array([[0.0], [2.0]])
        b = np.array([[1.0]])
        assert mean_pairwise_distance(a, b) == 1.0

    def test_symmetric(self):
        """Swapping the batches does not change the distance."""
        a, b = _normal(120, 2, 0), _normal(90, 2, 1, shift=0.7)
        assert energy_distance(a, b).value == pytest.approx(
            energy_distance(b, a).value, rel=1e-12
        )

    def test_rotation_invariant(self):
        """Rotating both batches by the same orthogonal map preserves the distance."""
        a, b = _normal(100, 3, 0), _normal(100, 3, 1, scale=1.5)
        q, _ = np.linalg.qr(np.random.default_rng(4).normal(size=(3, 3)))
        assert energy_distance(a @ q.T, b @ q.T).value == pytest.approx(
            energy_distance(a, b).value, rel=1e-10
        )

    def test_matches_double_loop(self):
        """N(0, 1) vs N(3, 1) agrees with an explicit pairwise loop."""
        a, b = _normal(60, 1, 0)[:, 0], _normal(50, 1, 1, shift=3.0)[:, 0]

        def mean_abs(x, y):
            total = 0.0
            for xi in x:
                for yj in y:
                    total += abs(xi - yj)
            return total / (len(x) * len(y))

        expected = 2.0 * mean_abs(a, b) - mean_abs(a, a) - mean_abs(b, b)
        assert energy_distance(a, b).value == pytest.approx(expected, abs=1e-10)


class TestWasserstein:
    """Test 1-D and sliced Wasserstein distances."""

    def test_equal_sizes(self):
        """A pure shift is recovered."""
        x = np.array([0.0, 1.0, 5.0])
        assert wasserstein2_1d(x, x + 2.0) == pytest.approx(2.0)

    def test_order_invariant(self):
        """Inputs need not be sorted."""
        assert wasserstein2_1d(np.array([3.0, 1.0]), np.array([1.0, 3.0])) == 0.0

    def test_unequal_sizes(self):
        """Quantiles are compared on the merged level grid."""
        value = wasserstein2_1d(np.array([0.0, 1.0]), np.array([0.0, 0.5, 1.0]))
        assert value == pytest.approx(np.sqrt(1.0 / 12.0), rel=1e-12)

    def test_repeated_sample_is_same_law(self):
        """Duplicating every point leaves the empirical law unchanged."""
        x = np.array([0.0, 1.0])
        assert wasserstein2_1d(x, np.repeat(x, 2)) == 0.0

    def test_sliced_recovers_scale_gap(self):
        """N(0, I) vs N(0, 4 I): every projection has W2 = 1."""
        a = _normal(20_000, 2, 0)
        b = _normal(20_000, 2, 1, scale=2.0)
        report = sliced_wasserstein(a, b, 16, NoiseSource(2))
        assert report.value == pytest.approx(1.0, abs=0.05)
        assert report.standard_error is not None
        assert report.seed == 2

    def test_sliced_one_dimensional_shift(self):
        """In 1-D every direction is +-1."""
        a = _normal(50, 1, 0)
        report = sliced_wasserstein(a, a + 3.0, 4, NoiseSource(0))
        assert report.value == pytest.approx(3.0, rel=1e-12)

    def test_single_projection_has_no_error_bar(self):
        """One projection gives no standard error."""
        a = _normal(10, 2, 0)
        assert sliced_wasserstein(a, a, 1, NoiseSource(0)).standard_error is None

    def test_projection_count(self):
        """At least one projection."""
        with pytest.raises(MetricError):
            sliced_wasserstein(np.zeros((2, 2)), np.zeros((2, 2)), 0, NoiseSource(0))

    def test_sliced_identical_batches(self):
        """A batch against itself scores 0 on every projection."""
        a = _normal(500, 3, 0)
        assert sliced_wasserstein(a, a, 32, NoiseSource(1)).value == pytest.approx(0.0, abs=1e-12)

    def test_sliced_projection_count_stability(self):
        """64 and 1024 projections agree within 10 %."""
        a = _normal(5000, 3, 0)
        b = _normal(5000, 3, 1, scale=2.0) + np.array([0.5, 0.0, 0.0])
        coarse = sliced_wasserstein(a, b, 64, NoiseSource(2)).value
        fine = sliced_wasserstein(a, b, 1024, NoiseSource(3)).value
        assert coarse == pytest.approx(fine, rel=0.1)

    def test_sliced_fixed_seed(self):
        """The same seed draws the same directions and gives the same value."""
        a, b = _normal(200, 2, 0), _normal(200, 2, 1, shift=1.0)
        first = sliced_wasserstein(a, b, 16, NoiseSource(9)).value
        assert sliced_wasserstein(a, b, 16, NoiseSource(9)).value == first


class TestMomentTest:
    """Test moment_test."""

    @pytest.fixture
    def law(self):
        return GaussianMixture(
            weights=np.array([1.0]), means=np.array([[1.0, -1.0]]), variances=np.array([0.5])
        )

    def test_matching_sample_passes(self, law):
        """Draws from the law pass the 4 SE gate."""
        report = moment_test(law.sample(20_000, NoiseSource(0)), law)
        assert report.passed is True
        assert report.value <= 4.0
        assert len(report.details["cov_z"]) == 3

    def test_shifted_sample_fails(self, law):
        """A mean offset is detected."""
        report = moment_test(law.sample(20_000, NoiseSource(0)) + 0.1, law)
        assert report.passed is False

    def test_diagonal_mode(self, law):
        """Diagonal mode gates variances only."""
        report = moment_test(law.sample(5_000, NoiseSource(1)), law, covariance="diagonal")
        assert len(report.details["cov_z"]) == 2
        assert report.details["covariance"] == "diagonal"

    def test_single_point_is_inconclusive(self, law):
        """n < 2 carries no verdict."""
        report = moment_test(np.array([[1.0, -1.0]]), law)
        assert report.value is None
        assert report.passed is None

    def test_validation(self, law):
        """Dimension and mode are checked."""
        with pytest.raises(MetricError):
            moment_test(np.zeros((5, 3)), law)
        with pytest.raises(MetricError):
            moment_test(np.zeros((5, 2)), law, covariance="banded")


class TestEnergyTest:
    """Test the permutation energy test."""

    def test_same_law_not_rejected(self):
        """Two draws of one law pass."""
        report = energy_test(_normal(400, 2, 0), _normal(400, 2, 1), NoiseSource(2))
        assert report.passed is True
        assert 0.0 < report.details["p_value"] <= 1.0

    def test_different_laws_rejected(self):
        """A unit shift is detected with the smallest p-value."""
        report = energy_test(
            _normal(300, 2, 0), _normal(300, 2, 1, shift=1.0), NoiseSource(2), n_permutations=199
        )
        assert report.passed is False
        assert report.details["p_value"] == pytest.approx(1.0 / 200.0)

    def test_subsampling(self):
        """Batches above max_samples are subsampled."""
        report = energy_test(_normal(900, 1, 0), _normal(700, 1, 1), NoiseSource(0), n_permutations=5)
        assert (report.n_a, report.n_b) == (500, 500)

    def test_permutation_count(self):
        """At least one permutation."""
        with pytest.raises(MetricError):
            energy_test(np.zeros((3, 1)), np.zeros((3, 1)), NoiseSource(0), n_permutations=0)


class TestMetricReport:
    """Test MetricReport."""

    def test_to_dict(self):
        """Every field is serialized."""
        data = MetricReport(metric="m", value=1.5, details={"k": 1}).to_dict()
        assert data["metric"] == "m"
        assert data["value"] == 1.5
        assert data["passed"] is None
        assert data["details"] == {"k": 1}
