import numpy as np
import pytest
from scipy.special import expit, logit

from ccgen.models.alt_prior import SigmoidNormalTreatment
from ccgen.models.config import PriorKind, RunConfig
from ccgen.operations.alt_prior_ops import (
    bernstein_basis,
    bernstein_cepo,
    cepo_surface_bernstein,
    cepo_surface_value_based,
    mix_coefficients,
    sample_sigmoid_normal_treatment,
    value_based_cepo,
)
from ccgen.operations.dgp_ops import sample_dgp_dataset
from ccgen.operations.mlp_ops import deterministic_forward
from ccgen.operations.rng_ops import derive_stream


@pytest.fixture(scope="module")
def bernstein_draw():
    return sample_dgp_dataset(RunConfig(prior=PriorKind.BERNSTEIN, n_samples=256), seed=4)


@pytest.fixture(scope="module")
def value_based_draw():
    return sample_dgp_dataset(RunConfig(prior=PriorKind.VALUE_BASED, n_samples=2048), seed=6)


class TestSigmoidNormal:
    def test_treatment_strictly_inside_unit_interval(self, rng):
        model = SigmoidNormalTreatment(cond_mean=3.0 * rng.standard_normal(2000), cond_std=np.ones(2000), overlap=1.0)
        t = sample_sigmoid_normal_treatment(model, rng)
        assert ((t > 0.0) & (t < 1.0)).all()

    def test_zero_variance_limit(self, rng):
        mean = rng.standard_normal(50)
        model = SigmoidNormalTreatment(cond_mean=mean, cond_std=np.zeros(50), overlap=0.5)
        np.testing.assert_allclose(sample_sigmoid_normal_treatment(model, rng), expit(mean), rtol=0, atol=1e-15)

    def test_smaller_overlap_shrinks_variance(self):
        n = 10_000
        wide = SigmoidNormalTreatment(np.zeros(n), np.ones(n), overlap=1.0)
        narrow = SigmoidNormalTreatment(np.zeros(n), np.ones(n), overlap=0.1)
        z_wide = logit(sample_sigmoid_normal_treatment(wide, derive_stream(0, "test/overlap")))
        z_narrow = logit(sample_sigmoid_normal_treatment(narrow, derive_stream(0, "test/overlap")))
        assert z_narrow.var() < z_wide.var()
        assert z_narrow.var() == pytest.approx(0.01, rel=0.1)

    def test_overlap_out_of_range(self, rng):
        with pytest.raises(ValueError):
            sample_sigmoid_normal_treatment(SigmoidNormalTreatment(np.zeros(3), np.ones(3), overlap=0.0), rng)


class TestBernstein:
    @pytest.mark.parametrize("degree", range(2, 9))
    def test_partition_of_unity(self, degree):
        basis = bernstein_basis(np.linspace(0.0, 1.0, 101), degree)
        assert basis.shape == (101, degree + 1)
        np.testing.assert_allclose(basis.sum(axis=-1), 1.0, rtol=0, atol=1e-12)

    def test_endpoint_basis(self):
        np.testing.assert_allclose(bernstein_basis(0.0, 4), [1.0, 0.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(bernstein_basis(1.0, 4), [0.0, 0.0, 0.0, 0.0, 1.0])

    def test_homogeneous_mixing(self, rng):
        individual = rng.standard_normal((20, 5))
        global_coeffs = rng.standard_normal(5)
        mixed = mix_coefficients(individual, global_coeffs, 0.0)
        assert (mixed == global_coeffs).all()

    def test_row_variance_grows_with_heterogeneity(self, bernstein_draw):
        dgp, _ = bernstein_draw
        individual = deterministic_forward(dgp.coeff_mlp, dgp.covariates)
        basis = bernstein_basis(np.array([0.1, 0.5, 0.9]), dgp.degree)
        spread = np.array(
            [
                (mix_coefficients(individual, dgp.global_coeffs, lam) @ basis.T).var(axis=0)
                for lam in np.linspace(0.0, 1.0, 11)
            ]
        )
        np.testing.assert_allclose(spread[0], 0.0, atol=1e-20)
        assert (spread[-1] > 0.0).all()
        assert (np.diff(spread, axis=0) >= 0.0).all()

    def test_sample(self, bernstein_draw):
        dgp, dataset = bernstein_draw
        assert 2 <= dgp.degree <= 8
        assert 0.0 <= dgp.heterogeneity <= 1.0 and 0.1 <= dgp.overlap <= 1.0
        assert ((dataset.t > 0.0) & (dataset.t < 1.0)).all()
        assert dataset.is_finite()
        assert abs(dgp.noise.mean()) < 1e-9

    def test_surface_at_zero_is_first_coefficient(self, bernstein_draw):
        dgp, _ = bernstein_draw
        np.testing.assert_allclose(cepo_surface_bernstein(dgp, np.array([0.0]))[:, 0], dgp.coeffs[:, 0], atol=1e-12)

    def test_pointwise_oracle_matches_counterfactuals(self, bernstein_draw):
        dgp, dataset = bernstein_draw
        for row in (0, 42, 255):
            got = bernstein_cepo(dgp.covariates[row], float(dataset.t_cf[row]), dgp)
            assert got == pytest.approx(dataset.cepo_cf[row], rel=1e-9, abs=1e-9)

    def test_pointwise_oracle_rejects_out_of_range(self, bernstein_draw):
        dgp, _ = bernstein_draw
        with pytest.raises(ValueError):
            bernstein_cepo(dgp.covariates[0], -0.1, dgp)


class TestValueBased:
    def test_support_points(self, value_based_draw):
        dgp, dataset = value_based_draw
        knots = dgp.support_points
        assert 3 <= knots.shape[0] <= 12
        assert (np.diff(knots) > 0.0).all()
        assert dgp.cepo_columns.shape == (dataset.n_rows, knots.shape[0])

    def test_knot_exactness_and_midpoints(self, value_based_draw):
        dgp, _ = value_based_draw
        knots = dgp.support_points
        row = 7
        for k, knot in enumerate(knots):
            cepo, noise = value_based_cepo(row, float(knot), dgp)
            assert cepo == pytest.approx(dgp.cepo_columns[row, k], rel=1e-10, abs=1e-12)
            assert noise == pytest.approx(dgp.noise_columns[row, k], rel=1e-10, abs=1e-12)
        mid = 0.5 * (knots[0] + knots[1])
        cepo, _ = value_based_cepo(row, float(mid), dgp)
        assert cepo == pytest.approx(0.5 * (dgp.cepo_columns[row, 0] + dgp.cepo_columns[row, 1]), rel=1e-10, abs=1e-12)

    def test_surface_matches_pointwise(self, value_based_draw):
        dgp, _ = value_based_draw
        grid = np.linspace(0.0, 1.0, 9)
        surface = cepo_surface_value_based(dgp, grid)
        for g, t in enumerate(grid):
            assert surface[3, g] == pytest.approx(value_based_cepo(3, float(t), dgp)[0], rel=1e-10, abs=1e-12)

    def test_noise_fraction_per_knot(self, value_based_draw):
        dgp, _ = value_based_draw
        cepo_var = dgp.cepo_columns.var(axis=0)
        live = cepo_var > 1e-12
        ratio = dgp.noise_columns.var(axis=0)[live] / cepo_var[live]
        noisy = dgp.noise_columns.var(axis=0)[live] > 0.0
        np.testing.assert_allclose(ratio[noisy], dgp.noise_fraction, rtol=0.1)

    def test_counterfactuals_use_interpolation(self, value_based_draw):
        dgp, dataset = value_based_draw
        row = 11
        cepo, _ = value_based_cepo(row, float(dataset.t_cf[row]), dgp)
        assert cepo == pytest.approx(dataset.cepo_cf[row], rel=1e-10, abs=1e-12)
