import numpy as np
import pytest

from ccgen.exceptions.data import TreatmentOutOfRange
from ccgen.models.config import CorruptionMode, PriorKind, RunConfig, Toggle
from ccgen.models.prior import CorruptionKind, CorruptionPhase
from ccgen.operations.dgp_ops import dataset_digest, sample_dgp_dataset
from ccgen.operations.prior_ops import (
    apply_tabular_corruption,
    assign_covariate_roles,
    cepo_surface_three_mlp,
    generate_treatment,
    make_corruption_plan,
    positivity_scale,
    query_cepo,
    query_cepo_one_mlp,
    redraw_factual_outcomes,
    sample_prior_hyperparams,
    structurally_unconfounded,
    treatment_edges_protected,
)
from ccgen.operations.rng_ops import derive_stream


@pytest.mark.parametrize("seed", range(25))
def test_hyperparams_respect_bounds(seed):
    hp = sample_prior_hyperparams(derive_stream(seed, "test/hyperparams"))
    assert hp.n_samples == 2048
    assert min(hp.layers_x, hp.layers_t, hp.layers_y) >= 3
    assert min(hp.hidden_x, hp.hidden_t, hp.hidden_y) >= 4
    for density in (hp.density_x, hp.density_t, hp.density_y):
        assert 0.1 <= density <= 1.0
    assert 0.0 <= hp.confounding <= 1.0
    assert 2 <= hp.requested_covariates <= 98
    assert hp.n_covariates == min(hp.requested_covariates, hp.layers_x * hp.hidden_x)


class TestTabularCorruption:
    def test_binarize_is_indicator(self, rng):
        out = apply_tabular_corruption(np.array([-1.0, 0.5, 2.0]), CorruptionKind.BINARIZE, rng)
        assert set(out.tolist()) <= {0.0, 1.0}

    def test_binarize_constant_is_zero(self, rng):
        out = apply_tabular_corruption(np.full(5, 3.0), CorruptionKind.BINARIZE, rng)
        assert (out == 0.0).all()

    def test_quantize_constant_passthrough(self, rng):
        column = np.full(6, -2.5)
        np.testing.assert_array_equal(apply_tabular_corruption(column, CorruptionKind.QUANTIZE, rng, levels=4), column)

    def test_quantize_uses_at_most_levels_values(self, rng):
        out = apply_tabular_corruption(rng.standard_normal(500), CorruptionKind.QUANTIZE, rng, levels=4)
        assert len(np.unique(out)) <= 4

    def test_zero_inflate_full_rate(self, rng):
        out = apply_tabular_corruption(rng.standard_normal(50), CorruptionKind.ZERO_INFLATE, rng, rate=1.0)
        assert (out == 0.0).all()


def test_corruption_plan_shares(rng):
    candidates = [(1, i) for i in range(4000)]
    plan = make_corruption_plan(candidates, 4000, CorruptionMode.IN_PASS, rng)
    corrupted = [node for node in plan if node.kind is not CorruptionKind.NONE]
    in_pass = [node for node in corrupted if node.phase is CorruptionPhase.IN_PASS]
    assert len(corrupted) / len(plan) == pytest.approx(0.5, abs=0.05)
    assert len(in_pass) / len(corrupted) == pytest.approx(0.35, abs=0.05)


def test_post_hoc_only_never_corrupts_in_pass(rng):
    candidates = [(2, i) for i in range(500)]
    plan = make_corruption_plan(candidates, 300, CorruptionMode.POST_HOC_ONLY, rng)
    assert all(node.phase is not CorruptionPhase.IN_PASS for node in plan)
    assert len({(node.layer, node.index) for node in plan}) == 300


def test_corruptible_prefix(rng):
    plan = make_corruption_plan([(1, i) for i in range(100)], 100, CorruptionMode.IN_PASS, rng, corruptible=10)
    assert all(node.kind is CorruptionKind.NONE for node in plan[10:])


@pytest.mark.parametrize("rho, conf", [(1.0, 10), (0.5, 5), (0.26, 3)])
def test_roles_confounder_count(rng, rho, conf):
    split = assign_covariate_roles(10, rho, rng)
    assert len(split.conf_indices) == conf
    assert sorted(split.conf_indices + split.t_only_indices + split.y_only_indices) == list(range(10))


def test_roles_without_confounding_partition(rng):
    split = assign_covariate_roles(10, 0.0, rng)
    assert split.size == 10
    assert split.treatment_inputs and split.outcome_inputs


def test_roles_repair_single_covariate(rng):
    split = assign_covariate_roles(1, 0.0, rng)
    assert split.conf_indices == (0,)


def test_positivity_scale_floor():
    eta = np.array([0.0, 1.0, -2.0])
    scale, std = positivity_scale(eta, 0.05)
    assert std == pytest.approx(eta.std())
    assert (scale >= 0.05).all()
    assert scale[0] == 0.05


class TestThreeMlp:
    def test_structure(self, three_mlp_draw):
        dgp, dataset = three_mlp_draw
        split = dgp.split
        assert split.size == dataset.n_covariates
        assert sorted(split.conf_indices + split.t_only_indices + split.y_only_indices) == list(
            range(dataset.n_covariates)
        )
        assert dgp.mlp_t.widths[0] == len(split.treatment_inputs)
        assert dgp.mlp_y.widths[0] == len(split.outcome_inputs) + 1
        assert treatment_edges_protected(dgp)
        assert dgp.sigma_t_tilde > 0.0 and dgp.sigma_mu > 0.0

    def test_mechanisms_ignore_foreign_columns(self, three_mlp_draw):
        dgp, dataset = three_mlp_draw
        assert structurally_unconfounded(dgp, dataset.covariates)

    def test_dataset_ranges(self, three_mlp_draw):
        _, dataset = three_mlp_draw
        assert dataset.is_finite()
        assert dataset.n_rows == 256
        assert dataset.t.min() == 0.0 and dataset.t.max() == 1.0
        assert ((dataset.t_cf >= 0.0) & (dataset.t_cf <= 1.0)).all()

    def test_dataset_is_read_only(self, three_mlp_draw):
        _, dataset = three_mlp_draw
        with pytest.raises(ValueError):
            dataset.y[0] = 1.0

    def test_counterfactual_oracle_is_exact(self, three_mlp_draw):
        dgp, dataset = three_mlp_draw
        for row in (0, 17, 255):
            assert query_cepo(dgp, row, float(dataset.t_cf[row])) == dataset.cepo_cf[row]

    def test_factual_oracle_without_noise(self, noiseless_draw):
        dgp, dataset = noiseless_draw
        for row in (3, 100):
            assert query_cepo(dgp, row, float(dataset.t[row])) == dataset.y[row]

    def test_surface_shape(self, three_mlp_draw):
        dgp, dataset = three_mlp_draw
        surface = cepo_surface_three_mlp(dgp, np.linspace(0.0, 1.0, 65))
        assert surface.shape == (dataset.n_rows, 65)
        assert np.isfinite(surface).all()

    def test_out_of_range_query(self, three_mlp_draw):
        dgp, _ = three_mlp_draw
        with pytest.raises(TreatmentOutOfRange):
            query_cepo(dgp, 0, 1.5)

    def test_positivity_floor_per_row(self, three_mlp_draw):
        dgp, dataset = three_mlp_draw
        draw = generate_treatment(dgp, dataset.covariates, derive_stream(0, "test/treatment"))
        assert (draw.noise_std >= dgp.positivity_floor * draw.sigma_t_tilde).all()

    def test_monte_carlo_redraws_match_oracle(self, three_mlp_draw):
        dgp, dataset = three_mlp_draw
        rng = derive_stream(0, "test/redraw")
        for row in (1, 50, 200):
            t = float(rng.uniform())
            draws = redraw_factual_outcomes(dgp, row, t, 10_000, rng)
            se = draws.std() / np.sqrt(draws.shape[0])
            assert abs(draws.mean() - query_cepo(dgp, row, t)) <= 4.0 * se + 1e-12


def test_positivity_off_uses_mechanism_directly():
    dgp, dataset = sample_dgp_dataset(RunConfig(n_samples=128, positivity=Toggle.OFF), seed=2)
    draw = generate_treatment(dgp, dataset.covariates, derive_stream(0, "test/treatment"))
    assert (draw.noise_std == 0.0).all()
    lo, hi = draw.t_tilde.min(), draw.t_tilde.max()
    np.testing.assert_array_equal(draw.t, (draw.t_tilde - lo) / (hi - lo))


def test_sampling_is_deterministic(small_config):
    _, first = sample_dgp_dataset(small_config, seed=21, index=4)
    _, second = sample_dgp_dataset(small_config, seed=21, index=4)
    assert dataset_digest(first) == dataset_digest(second)


def test_one_mlp_prior():
    config = RunConfig(prior=PriorKind.ONE_MLP, n_samples=256)
    dgp, dataset = sample_dgp_dataset(config, seed=3)
    assert dataset.is_finite()
    assert dataset.t.min() == 0.0 and dataset.t.max() == 1.0
    assert dataset.n_covariates == dgp.hyperparams.n_covariates
    assert dgp.treatment_node not in {(node.layer, node.index) for node in dgp.covariate_nodes}
    assert dgp.outcome_node[0] == dgp.mlp.layer_count
    for row in (0, 99):
        assert query_cepo_one_mlp(dgp, row, float(dataset.t_cf[row])) == dataset.cepo_cf[row]
