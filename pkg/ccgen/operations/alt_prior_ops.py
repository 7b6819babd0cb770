"""Bernstein-polynomial and value-based priors.

Both start from a base table produced by an MLP_X draw of the 3-MLP prior and
share the sigmoid-normal treatment mechanism.
"""

import numpy as np
from scipy.stats import binom

from ccgen.exceptions.prior import DegenerateTreatment, NonFiniteGeneration
from ccgen.models.alt_prior import BernsteinDgp, SigmoidNormalTreatment, ValueBasedDgp
from ccgen.models.config import RunConfig
from ccgen.models.prior import Dataset, PriorHyperparams, RandomMlp
from ccgen.operations.mlp_ops import build_random_mlp, deterministic_forward, logistic, softplus
from ccgen.operations.prior_ops import (
    _assemble_dataset,
    column_stats,
    generate_covariates,
    make_corruption_plan,
    sample_prior_hyperparams,
    zscore,
)
from ccgen.operations.rng_ops import derive_stream

MIN_COND_STD = 1e-3
_T_EPS = 1e-12


# --- sigmoid-normal treatments ---------------------------------------------


def sigmoid_normal_conditionals(
    covariates: np.ndarray, treatment_mlp: RandomMlp, overlap: float
) -> SigmoidNormalTreatment:
    """Row-wise (mu_{t|x}, sigma_{t|x}) from a conditional MLP with a softplus on sigma."""
    out = deterministic_forward(treatment_mlp, covariates)
    return SigmoidNormalTreatment(
        cond_mean=out[:, 0], cond_std=softplus(out[:, 1]) + MIN_COND_STD, overlap=overlap
    )


def sample_sigmoid_normal_treatment(model: SigmoidNormalTreatment, rng: np.random.Generator) -> np.ndarray:
    """t = logistic(N(mu_{t|x}, (alpha * sigma_{t|x})^2)), kept strictly inside (0, 1)."""
    if not 0.0 < model.overlap <= 1.0:
        raise ValueError(f"overlap must lie in (0, 1], got {model.overlap}")
    z = model.cond_mean + model.effective_std * rng.standard_normal(model.cond_mean.shape[0])
    return np.clip(logistic(z), _T_EPS, 1.0 - _T_EPS)


# --- shared base table -----------------------------------------------------


def _base_table(
    config: RunConfig, seed: int, index: int, attempt: int, tag: str, reserved: int
) -> tuple[np.ndarray, np.ndarray, PriorHyperparams]:
    """Covariates (standardized) and ``reserved`` uncorrupted extra columns from an MLP_X draw."""
    hp = sample_prior_hyperparams(
        derive_stream(seed, f"{tag}/hyperparams", index, attempt),
        n_samples=config.n_samples,
        max_covariates=config.max_covariates,
    )
    rng_x = derive_stream(seed, f"{tag}/mlp_x", index, attempt)
    mlp_x = build_random_mlp(hp.layers_x, hp.hidden_x, hp.density_x, frozenset(), rng_x)
    nodes = mlp_x.nodes()
    k = max(1, min(hp.n_covariates, len(nodes) - reserved))
    if k + reserved > len(nodes):
        raise DegenerateTreatment("base table too narrow for the reserved columns")
    hp = hp.model_copy(update={"n_covariates": k})
    plan = make_corruption_plan(nodes, k + reserved, config.corruption_mode, rng_x, corruptible=k)
    table = generate_covariates(
        mlp_x, hp.n_samples, k + reserved, hp.noise_scale, plan, derive_stream(seed, f"{tag}/table", index, attempt)
    )
    covariates = zscore(table[:, :k], *column_stats(table[:, :k]))
    return covariates, table[:, k:], hp


def _conditional_mlp(rng: np.random.Generator, in_dim: int, out_dim: int) -> RandomMlp:
    layers = int(rng.integers(2, 4))
    width = int(rng.integers(8, 33))
    density = float(rng.uniform(0.5, 1.0))
    return build_random_mlp(layers, width, density, frozenset(), rng, in_dim=in_dim, out_dim=out_dim)


# --- Bernstein prior -------------------------------------------------------


def bernstein_basis(t: np.ndarray | float, degree: int) -> np.ndarray:
    """b_{k,K}(t) = C(K, k) t^k (1-t)^(K-k), shape (..., K+1)."""
    t = np.asarray(t, dtype=float)
    return binom.pmf(np.arange(degree + 1), degree, t[..., None])


def mix_coefficients(individual: np.ndarray, global_coeffs: np.ndarray, heterogeneity: float) -> np.ndarray:
    """c = lambda * c(x) + (1 - lambda) * c0."""
    return heterogeneity * individual + (1.0 - heterogeneity) * global_coeffs


def bernstein_cepo(x_row: np.ndarray, t: float, dgp: BernsteinDgp) -> float:
    """mu_t(x) = sum_k c_k b_{k,K}(t) with the mixed coefficients of x (standardized covariates)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    individual = deterministic_forward(dgp.coeff_mlp, np.atleast_2d(x_row))[0]
    coeffs = mix_coefficients(individual, dgp.global_coeffs, dgp.heterogeneity)
    return float(bernstein_basis(t, dgp.degree) @ coeffs)


def cepo_surface_bernstein(dgp: BernsteinDgp, t_grid: np.ndarray) -> np.ndarray:
    return dgp.coeffs @ bernstein_basis(np.asarray(t_grid, dtype=float), dgp.degree).T


def sample_bernstein(config: RunConfig, seed: int, index: int = 0, attempt: int = 0) -> tuple[BernsteinDgp, Dataset]:
    covariates, reserved, hp = _base_table(config, seed, index, attempt, "bernstein", reserved=1)
    n, k = covariates.shape
    rng = derive_stream(seed, "bernstein/mechanism", index, attempt)
    degree = int(rng.integers(2, 9))
    global_coeffs = rng.standard_normal(degree + 1)
    heterogeneity = float(rng.uniform(0.0, 1.0))
    overlap = float(rng.uniform(0.1, 1.0))
    noise_ratio = float(rng.uniform(0.05, 0.5))
    treatment_mlp = _conditional_mlp(rng, k, 2)
    coeff_mlp = _conditional_mlp(rng, k, degree + 1)

    coeffs = mix_coefficients(deterministic_forward(coeff_mlp, covariates), global_coeffs, heterogeneity)
    t = sample_sigmoid_normal_treatment(
        sigmoid_normal_conditionals(covariates, treatment_mlp, overlap),
        derive_stream(seed, "bernstein/treatment", index, attempt),
    )
    mu = np.einsum("nk,nk->n", coeffs, bernstein_basis(t, degree))
    if not (np.isfinite(coeffs).all() and np.isfinite(t).all()):
        raise NonFiniteGeneration("Bernstein mechanism")

    column = reserved[:, 0]
    spread = column.std()
    unit = (column - column.mean()) / spread if spread > 0.0 else np.zeros(n)
    noise = noise_ratio * float(mu.std()) * unit

    dgp = BernsteinDgp(
        hyperparams=hp,
        degree=degree,
        global_coeffs=global_coeffs,
        coeff_mlp=coeff_mlp,
        treatment_mlp=treatment_mlp,
        heterogeneity=heterogeneity,
        overlap=overlap,
        covariates=covariates,
        coeffs=coeffs,
        noise=noise,
        seed=seed,
        index=index,
        retries=attempt,
    )
    t_cf = derive_stream(seed, "counterfactual", index, attempt).uniform(0.0, 1.0, size=(n, config.counterfactuals_per_row))
    cepo_cf = np.column_stack(
        [np.einsum("nk,nk->n", coeffs, bernstein_basis(t_cf[:, c], degree)) for c in range(t_cf.shape[1])]
    )
    return dgp, _assemble_dataset(covariates, t, mu + noise, t_cf, cepo_cf)


# --- value-based prior -----------------------------------------------------


def _interpolate_rows(t: np.ndarray, knots: np.ndarray, columns: np.ndarray) -> np.ndarray:
    """Row-wise linear interpolation of columns (N, n) at per-row t (N,), clamped to the end knots."""
    t = np.clip(t, knots[0], knots[-1])
    right = np.clip(np.searchsorted(knots, t, side="right"), 1, knots.shape[0] - 1)
    left = right - 1
    weight = (t - knots[left]) / (knots[right] - knots[left])
    rows = np.arange(columns.shape[0])
    return (1.0 - weight) * columns[rows, left] + weight * columns[rows, right]


def value_based_cepo(row: int, t: float, dgp: ValueBasedDgp) -> tuple[float, float]:
    """(cepo, noise) at t for one row, interpolating between the two nearest support points."""
    knots = dgp.support_points
    cepo = float(np.interp(t, knots, dgp.cepo_columns[row]))
    noise = float(np.interp(t, knots, dgp.noise_columns[row]))
    return cepo, noise


def cepo_surface_value_based(dgp: ValueBasedDgp, t_grid: np.ndarray) -> np.ndarray:
    n = dgp.cepo_columns.shape[0]
    return np.column_stack(
        [_interpolate_rows(np.full(n, float(t)), dgp.support_points, dgp.cepo_columns) for t in t_grid]
    )


def sample_value_based(
    config: RunConfig, seed: int, index: int = 0, attempt: int = 0
) -> tuple[ValueBasedDgp, Dataset]:
    rng = derive_stream(seed, "value_based/mechanism", index, attempt)
    knot_count = int(rng.integers(3, 13))
    covariates, reserved, hp = _base_table(
        config, seed, index, attempt, "value_based", reserved=2 * knot_count
    )
    n, k = covariates.shape
    knots = np.sort(rng.uniform(0.0, 1.0, size=knot_count))
    if not (np.diff(knots) > 0.0).all():
        raise DegenerateTreatment("support points not strictly increasing")
    noise_fraction = float(rng.uniform(0.05, 0.3))
    overlap = float(rng.uniform(0.1, 1.0))
    treatment_mlp = _conditional_mlp(rng, k, 2)

    cepo_columns = reserved[:, :knot_count]
    raw_noise = reserved[:, knot_count:]
    noise_std = raw_noise.std(axis=0)
    unit = np.where(noise_std > 0.0, (raw_noise - raw_noise.mean(axis=0)) / np.where(noise_std > 0.0, noise_std, 1.0), 0.0)
    noise_columns = unit * np.sqrt(noise_fraction * cepo_columns.var(axis=0))

    t = sample_sigmoid_normal_treatment(
        sigmoid_normal_conditionals(covariates, treatment_mlp, overlap),
        derive_stream(seed, "value_based/treatment", index, attempt),
    )
    y = _interpolate_rows(t, knots, cepo_columns) + _interpolate_rows(t, knots, noise_columns)

    dgp = ValueBasedDgp(
        hyperparams=hp,
        support_points=knots,
        cepo_columns=cepo_columns,
        noise_columns=noise_columns,
        noise_fraction=noise_fraction,
        treatment_mlp=treatment_mlp,
        overlap=overlap,
        covariates=covariates,
        seed=seed,
        index=index,
        retries=attempt,
    )
    t_cf = derive_stream(seed, "counterfactual", index, attempt).uniform(0.0, 1.0, size=(n, config.counterfactuals_per_row))
    cepo_cf = np.column_stack(
        [_interpolate_rows(t_cf[:, c], knots, cepo_columns) for c in range(t_cf.shape[1])]
    )
    return dgp, _assemble_dataset(covariates, t, y, t_cf, cepo_cf)
