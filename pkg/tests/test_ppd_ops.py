import numpy as np
import pytest
import torch
from scipy.special import erf

from ccgen.exceptions.data import InsufficientContext
from ccgen.models.ppd import BinGrid, HistogramDistribution
from ccgen.operations.ppd_ops import (
    apply_standardizer,
    crps_loss,
    crps_loss_torch,
    fit_standardizer,
    gaussian_bin_mass,
    histogram_loss,
    histogram_loss_torch,
    histogram_mean,
    invert_standardizer,
)

GRID = BinGrid.uniform(1024, -10.0, 10.0)


def _erf_bin_mass(mu: float, sigma: float, grid: BinGrid) -> np.ndarray:
    cdf = 0.5 * (1.0 + erf((grid.edges - mu) / (sigma * np.sqrt(2.0))))
    cdf[0], cdf[-1] = 0.0, 1.0
    return np.diff(cdf)


class TestBinGrid:
    def test_uniform(self):
        assert GRID.bin_count == 1024
        assert GRID.width == pytest.approx(20.0 / 1024)
        assert GRID.is_monotone() and GRID.is_uniform()
        assert GRID.centers.shape == (1024,)

    def test_reversed_edges(self):
        assert not BinGrid(GRID.edges[::-1].copy()).is_monotone()

    def test_invalid(self):
        with pytest.raises(ValueError):
            BinGrid.uniform(8, 1.0, -1.0)


class TestStandardizer:
    def test_two_points_population_convention(self):
        s = fit_standardizer(np.array([0.0, 2.0]))
        assert (s.mean, s.std, s.degenerate) == (1.0, 1.0, False)

    def test_inverse(self, rng):
        y = rng.standard_normal(30) * 5.0 + 2.0
        s = fit_standardizer(y)
        np.testing.assert_allclose(invert_standardizer(s, apply_standardizer(s, y)), y, rtol=0, atol=1e-12)

    def test_constant_outcomes_are_degenerate(self):
        s = fit_standardizer(np.full(5, 3.0))
        assert s.degenerate
        np.testing.assert_array_equal(apply_standardizer(s, np.array([3.0, 4.0])), [0.0, 0.0])
        np.testing.assert_array_equal(invert_standardizer(s, np.array([0.5, -2.0])), [3.0, 3.0])

    def test_needs_two_outcomes(self):
        with pytest.raises(InsufficientContext):
            fit_standardizer(np.array([1.0]))


class TestGaussianBinMass:
    def test_delta_limit_is_one_hot(self):
        j = 300
        probs = gaussian_bin_mass(GRID.centers[j], 1e-6 * GRID.width, GRID).probs
        assert probs[j] == pytest.approx(1.0, abs=1e-12)
        assert probs.argmax() == j

    @pytest.mark.parametrize("mu, sigma", [(0.0, 0.01), (9.99, 0.5), (-14.0, 2.0), (3.3, 30.0)])
    def test_mass_sums_to_one_and_matches_erf(self, mu, sigma):
        probs = gaussian_bin_mass(mu, sigma, GRID).probs
        assert abs(probs.sum() - 1.0) <= 1e-12
        assert (probs >= 0.0).all()
        np.testing.assert_allclose(probs, _erf_bin_mass(mu, sigma, GRID), rtol=0, atol=1e-9)

    def test_central_bins_at_target_sigma(self):
        probs = gaussian_bin_mass(0.0, 0.01, GRID).probs
        central = probs[511] + probs[512]
        assert central > 0.94
        assert central == pytest.approx(_erf_bin_mass(0.0, 0.01, GRID)[511:513].sum(), abs=1e-9)

    def test_translation_consistency(self):
        shift = 5
        base = gaussian_bin_mass(0.37, 0.2, GRID).probs
        moved = gaussian_bin_mass(0.37 + shift * GRID.width, 0.2, GRID).probs
        np.testing.assert_allclose(moved[400 + shift : 600 + shift], base[400:600], atol=1e-12)

    def test_batched(self):
        probs = gaussian_bin_mass(np.array([-1.0, 0.0, 1.0]), 0.3, GRID).probs
        assert probs.shape == (3, 1024)
        np.testing.assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-12)

    def test_sigma_must_be_positive(self):
        with pytest.raises(ValueError):
            gaussian_bin_mass(0.0, 0.0, GRID)


class TestHistogramLoss:
    def test_one_hot_is_zero(self):
        target = HistogramDistribution(np.eye(8)[3])
        assert histogram_loss(target, target) == 0.0

    def test_equal_distributions_give_entropy(self, rng):
        p = rng.dirichlet(np.ones(8))
        assert histogram_loss(HistogramDistribution(p), HistogramDistribution(p)) == pytest.approx(-(p * np.log(p)).sum())

    @pytest.mark.parametrize("bins", [8, 1024])
    def test_matches_straight_summation(self, rng, bins):
        for _ in range(100):
            q, target = rng.dirichlet(np.ones(bins)), rng.dirichlet(np.ones(bins))
            oracle = 0.0
            for l in range(bins):
                oracle -= target[l] * np.log(max(q[l], 1e-12))
            assert abs(histogram_loss(HistogramDistribution(q), HistogramDistribution(target)) - oracle) < 1e-10

    def test_gibbs_inequality(self, rng):
        target = HistogramDistribution(rng.dirichlet(np.ones(16)))
        floor = histogram_loss(target, target)
        for _ in range(50):
            q = HistogramDistribution(rng.dirichlet(np.ones(16)))
            assert histogram_loss(q, target) >= floor

    def test_zero_probability_is_floored(self):
        q = HistogramDistribution(np.array([1.0, 0.0]))
        target = HistogramDistribution(np.array([0.0, 1.0]))
        assert histogram_loss(q, target) == pytest.approx(-np.log(1e-12))

    def test_torch_matches_numpy(self, rng):
        q, target = rng.dirichlet(np.ones(8), size=5), rng.dirichlet(np.ones(8), size=5)
        expected = histogram_loss(HistogramDistribution(q), HistogramDistribution(target)).mean()
        got = histogram_loss_torch(torch.log(torch.as_tensor(q)), torch.as_tensor(target))
        assert got.item() == pytest.approx(expected, rel=1e-12)


class TestHistogramMean:
    def test_one_hot(self):
        assert histogram_mean(HistogramDistribution(np.eye(1024)[700]), GRID) == pytest.approx(GRID.centers[700])

    def test_uniform_on_symmetric_grid(self):
        assert histogram_mean(HistogramDistribution(np.full(1024, 1 / 1024)), GRID) == pytest.approx(0.0, abs=1e-12)

    def test_gaussian_moment(self):
        assert abs(histogram_mean(gaussian_bin_mass(1.3, 0.5, GRID), GRID) - 1.3) < GRID.width


class TestCrps:
    def test_one_hot_at_true_bin(self):
        y = 0.123
        j = int(np.searchsorted(GRID.edges, y) - 1)
        assert crps_loss(HistogramDistribution(np.eye(1024)[j]), GRID, y) <= GRID.width

    def test_uniform_closed_form(self):
        grid = BinGrid.uniform(64, -10.0, 10.0)
        got = crps_loss(HistogramDistribution(np.full(64, 1 / 64)), grid, grid.lo)
        closed = sum((k / 64 - 1.0) ** 2 * grid.width for k in range(1, 65))
        assert abs(got - closed) < 1e-10

    def test_moving_mass_away_increases(self):
        y = 0.0
        near = crps_loss(gaussian_bin_mass(0.5, 0.2, GRID), GRID, y)
        far = crps_loss(gaussian_bin_mass(3.0, 0.2, GRID), GRID, y)
        assert 0.0 <= near < far

    def test_torch_matches_numpy(self, rng):
        grid = BinGrid.uniform(16, -3.0, 3.0)
        q = rng.dirichlet(np.ones(16), size=4)
        y = rng.standard_normal(4)
        expected = crps_loss(HistogramDistribution(q), grid, y).mean()
        got = crps_loss_torch(torch.as_tensor(q), torch.as_tensor(grid.edges), torch.as_tensor(y))
        assert got.item() == pytest.approx(expected, rel=1e-12)
