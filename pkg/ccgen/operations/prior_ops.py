"""3-MLP prior: hyperparameters, covariates, treatment, outcome and the CEPO oracle.

The single-MLP ablation prior lives here too since it shares the covariate
machinery (noise draws, in-pass and post-hoc tabular corruption).
"""

from dataclasses import replace
from typing import NamedTuple

import numpy as np
from scipy.stats import truncnorm

from ccgen.exceptions.data import TreatmentOutOfRange
from ccgen.exceptions.prior import (
    DegenerateOutcome,
    DegenerateTreatment,
    NonFiniteGeneration,
)
from ccgen.log import get_logger
from ccgen.models.config import CorruptionMode, RunConfig
from ccgen.models.prior import (
    CorruptionKind,
    CorruptionPhase,
    CovariateNode,
    CovariateSplit,
    Dataset,
    Dgp,
    Node,
    OneMlpDgp,
    PriorHyperparams,
    RandomMlp,
)
from ccgen.operations.mlp_ops import (
    build_random_mlp,
    draw_layer_noise,
    mechanism_forward,
    propagate,
)
from ccgen.operations.rng_ops import derive_stream

logger = get_logger(__name__)

CORRUPTION_PROBABILITY = 0.5
IN_PASS_SHARE = 0.35
_CORRUPTION_KINDS = (CorruptionKind.BINARIZE, CorruptionKind.QUANTIZE, CorruptionKind.ZERO_INFLATE)
_MIN_SPREAD = 1e-9


class TreatmentDraw(NamedTuple):
    t_raw: np.ndarray
    t: np.ndarray
    t_tilde: np.ndarray
    noise_std: np.ndarray  # conditional std of t_raw given x, per row
    sigma_t_tilde: float
    t_minmax: tuple[float, float]


class OutcomeDraw(NamedTuple):
    y: np.ndarray
    cepo: np.ndarray
    sigma_mu: float
    eta_y_std: float


# --- hyperparameters -------------------------------------------------------


def _log_uniform(rng: np.random.Generator, low: float, high: float) -> float:
    return float(np.exp(rng.uniform(np.log(low), np.log(high))))


def _truncated_count(rng: np.random.Generator, low: float, high: float, lower: int) -> int:
    """Round(TruncNormal(mean=alpha, var=alpha) on [lower, inf)), alpha ~ LogUniform(low, high)."""
    alpha = _log_uniform(rng, low, high)
    sd = np.sqrt(alpha)
    draw = truncnorm.rvs((lower - alpha) / sd, np.inf, loc=alpha, scale=sd, random_state=rng)
    return max(int(np.rint(draw)), lower)


def sample_prior_hyperparams(
    rng: np.random.Generator, *, n_samples: int = 2048, max_covariates: int = 98
) -> PriorHyperparams:
    """Draw one set of structural hyperparameters.

    K is clamped to the number of candidate covariate nodes of MLP_X (L_X * H_X).
    """
    layers = [_truncated_count(rng, 1.0, 10.0, 3) for _ in range(3)]
    hidden = [_truncated_count(rng, 10.0, 100.0, 4) for _ in range(3)]
    noise_scale = _log_uniform(rng, 1e-4, 0.5)
    densities = [float(rng.uniform(0.1, 1.0)) for _ in range(3)]
    confounding = float(rng.uniform(0.0, 1.0))
    requested = int(rng.integers(2, max_covariates + 1))
    return PriorHyperparams(
        n_samples=n_samples,
        n_covariates=min(requested, layers[0] * hidden[0]),
        layers_x=layers[0],
        layers_t=layers[1],
        layers_y=layers[2],
        hidden_x=hidden[0],
        hidden_t=hidden[1],
        hidden_y=hidden[2],
        density_x=densities[0],
        density_t=densities[1],
        density_y=densities[2],
        confounding=confounding,
        noise_scale=noise_scale,
        requested_covariates=requested,
    )


# --- tabular corruption ----------------------------------------------------


def apply_tabular_corruption(
    column: np.ndarray,
    kind: CorruptionKind,
    rng: np.random.Generator,
    *,
    levels: int = 5,
    rate: float = 0.3,
    quantile: float = 0.5,
) -> np.ndarray:
    """Binarize, quantize or zero-inflate one column across its N samples."""
    kind = CorruptionKind(kind)
    if kind is CorruptionKind.BINARIZE:
        threshold = np.quantile(column, quantile)
        return (column > threshold).astype(float)
    if kind is CorruptionKind.QUANTIZE:
        grid = np.quantile(column, np.linspace(0.0, 1.0, levels))
        nearest = np.abs(column[:, None] - grid[None, :]).argmin(axis=1)
        return grid[nearest]
    if kind is CorruptionKind.ZERO_INFLATE:
        out = column.copy()
        out[rng.random(column.shape[0]) < rate] = 0.0
        return out
    return column


def _corrupt(column: np.ndarray, node: CovariateNode, rng: np.random.Generator) -> np.ndarray:
    if not np.isfinite(column).all():
        raise NonFiniteGeneration("covariate generation")
    return apply_tabular_corruption(
        column, node.kind, rng, levels=node.levels, rate=node.rate, quantile=node.quantile
    )


def make_corruption_plan(
    candidates: list[Node],
    k: int,
    mode: CorruptionMode,
    rng: np.random.Generator,
    *,
    corruptible: int | None = None,
) -> tuple[CovariateNode, ...]:
    """Pick k covariate nodes without replacement and decide their corruption.

    Each node is corrupted with probability 0.5; a corrupted node is corrupted
    in-pass with probability 0.35 (never in ``post_hoc_only`` mode), otherwise
    post-hoc. Only the first ``corruptible`` picks may be corrupted.
    """
    if k > len(candidates):
        raise ValueError(f"{k} covariates requested from {len(candidates)} nodes")
    picks = rng.choice(len(candidates), size=k, replace=False)
    plan = []
    for j, pick in enumerate(picks):
        layer, index = candidates[int(pick)]
        corrupted = rng.random() < CORRUPTION_PROBABILITY
        in_pass = rng.random() < IN_PASS_SHARE
        kind = _CORRUPTION_KINDS[int(rng.integers(0, 3))]
        levels = int(rng.integers(2, 11))
        rate = float(rng.uniform(0.1, 0.5))
        quantile = float(rng.uniform(0.2, 0.8))
        if not corrupted or (corruptible is not None and j >= corruptible):
            plan.append(CovariateNode(layer=layer, index=index))
            continue
        phase = CorruptionPhase.IN_PASS if in_pass and mode is CorruptionMode.IN_PASS else CorruptionPhase.POST_HOC
        plan.append(
            CovariateNode(
                layer=layer, index=index, kind=kind, phase=phase, levels=levels, rate=rate, quantile=quantile
            )
        )
    return tuple(plan)


# --- covariates ------------------------------------------------------------


def _draw_mlp_noise(
    mlp: RandomMlp, n: int, noise_scale: float, rng: np.random.Generator
) -> tuple[np.ndarray, list[np.ndarray]]:
    widths = mlp.widths
    z0 = draw_layer_noise(rng, n, widths[0], 1.0)
    noise = [draw_layer_noise(rng, n, widths[layer], noise_scale) for layer in range(1, mlp.layer_count + 1)]
    return z0, noise


def _propagate_corrupted(
    mlp: RandomMlp,
    z0: np.ndarray,
    noise: list[np.ndarray],
    plan: tuple[CovariateNode, ...],
    rng: np.random.Generator,
    stop_layer: int | None = None,
) -> list[np.ndarray]:
    in_pass: dict[int, list[CovariateNode]] = {}
    for node in plan:
        if node.phase is CorruptionPhase.IN_PASS:
            in_pass.setdefault(node.layer, []).append(node)

    def corrupt_layer(layer: int, z: np.ndarray) -> None:
        for node in in_pass.get(layer, ()):
            z[:, node.index] = _corrupt(z[:, node.index], node, rng)

    states = propagate(mlp, z0, noise, stop_layer=stop_layer, on_layer=corrupt_layer)
    for state in states:
        if not np.isfinite(state).all():
            raise NonFiniteGeneration("covariate generation")
    return states


def _collect_covariates(
    states: list[np.ndarray], plan: tuple[CovariateNode, ...], rng: np.random.Generator
) -> np.ndarray:
    columns = []
    for node in plan:
        column = states[node.layer - 1][:, node.index].copy()
        if node.phase is CorruptionPhase.POST_HOC:
            column = _corrupt(column, node, rng)
        columns.append(column)
    return np.column_stack(columns)


def generate_covariates(
    mlp_x: RandomMlp,
    n: int,
    k: int,
    noise_scale: float,
    corruption_plan: tuple[CovariateNode, ...],
    rng: np.random.Generator,
) -> np.ndarray:
    """Propagate z^(l) = act(W z^(l-1)) + eps^(l) from z^(0) = eps^(0) and read k covariate nodes."""
    if k != len(corruption_plan):
        raise ValueError(f"plan covers {len(corruption_plan)} nodes, expected {k}")
    z0, noise = _draw_mlp_noise(mlp_x, n, noise_scale, rng)
    states = _propagate_corrupted(mlp_x, z0, noise, corruption_plan, rng)
    return _collect_covariates(states, corruption_plan, rng)


def column_stats(covariates: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and population stds; constant columns get std 1."""
    mean = covariates.mean(axis=0)
    std = covariates.std(axis=0)
    return mean, np.where(std > 0.0, std, 1.0)


def zscore(covariates: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    return (covariates - mean) / std


# --- roles -----------------------------------------------------------------


def assign_covariate_roles(k: int, rho: float, rng: np.random.Generator) -> CovariateSplit:
    """round(rho*k) confounders; the rest split uniformly between X^T and X^Y.

    If neither mechanism would keep a covariate input, one confounder is forced.
    """
    if k < 1:
        raise ValueError("need at least one covariate")
    order = rng.permutation(k)
    n_conf = min(int(np.floor(rho * k + 0.5)), k)
    conf, rest = list(order[:n_conf]), order[n_conf:]
    to_treatment = rng.random(rest.shape[0]) < 0.5
    t_only, y_only = list(rest[to_treatment]), list(rest[~to_treatment])
    if not conf and (not t_only or not y_only):
        donor = t_only if t_only else y_only
        conf.append(donor.pop(0))
    return CovariateSplit(
        conf_indices=tuple(sorted(int(i) for i in conf)),
        t_only_indices=tuple(sorted(int(i) for i in t_only)),
        y_only_indices=tuple(sorted(int(i) for i in y_only)),
    )


# --- treatment -------------------------------------------------------------


def _has_spread(values: np.ndarray) -> bool:
    std = float(values.std())
    return np.isfinite(std) and std > _MIN_SPREAD * max(1.0, float(np.abs(values).max()))


def positivity_scale(eta: np.ndarray, floor: float, eta_std: float | None = None) -> tuple[np.ndarray, float]:
    """scale(eta) = |eta / std(eta)| + floor. Returns the scale and the std used."""
    std = float(eta.std()) if eta_std is None else eta_std
    if std > 0.0 and np.isfinite(std):
        return np.abs(eta / std) + floor, std
    return np.full_like(eta, floor), 0.0


def _treatment_from_mechanism(
    t_tilde: np.ndarray,
    eta: np.ndarray,
    positivity: bool,
    floor: float,
    rng: np.random.Generator,
) -> TreatmentDraw:
    if not (np.isfinite(t_tilde).all() and np.isfinite(eta).all()):
        raise NonFiniteGeneration("treatment mechanism")
    if not _has_spread(t_tilde):
        raise DegenerateTreatment("sigma(T~) = 0")
    sigma = float(t_tilde.std())
    if positivity:
        scale, _ = positivity_scale(eta, floor)
        noise_std = sigma * scale
        t_raw = t_tilde + noise_std * rng.standard_normal(t_tilde.shape[0])
    else:
        noise_std = np.zeros_like(t_tilde)
        t_raw = t_tilde.copy()
    if not np.isfinite(t_raw).all():
        raise NonFiniteGeneration("treatment noise")
    lo, hi = float(t_raw.min()), float(t_raw.max())
    if not hi > lo:
        raise DegenerateTreatment("t_max = t_min")
    t = (t_raw - lo) / (hi - lo)
    return TreatmentDraw(t_raw, t, t_tilde, noise_std, sigma, (lo, hi))


def _treatment_forward(
    dgp: Dgp, covariates: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    inputs = zscore(covariates, dgp.x_mean, dgp.x_std)[:, dgp.split.treatment_inputs]
    widths = dgp.mlp_t.widths
    noise = [
        draw_layer_noise(rng, covariates.shape[0], widths[layer], dgp.hyperparams.noise_scale)
        for layer in range(1, dgp.mlp_t.layer_count)
    ]
    return mechanism_forward(dgp.mlp_t, inputs, noise, dgp.eta_t_node)


def generate_treatment(dgp: Dgp, covariates: np.ndarray, rng: np.random.Generator) -> TreatmentDraw:
    """T = T~ + sigma(T~) * scale(eta_T) * eps, min-max scaled to [0, 1]."""
    t_tilde, eta = _treatment_forward(dgp, covariates, rng)
    return _treatment_from_mechanism(t_tilde, eta, dgp.positivity, dgp.positivity_floor, rng)


# --- outcome and CEPO oracle -----------------------------------------------


def _outcome_forward(dgp: Dgp, inputs: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # always the full N-row batch, so every query shares the factual arithmetic
    return mechanism_forward(dgp.mlp_y, np.column_stack([inputs, t]), dgp.outcome_noise, dgp.eta_y_node)


def _outcome_from_mechanism(
    mu: np.ndarray, eta: np.ndarray, floor: float, multiplier: float, rng: np.random.Generator
) -> OutcomeDraw:
    if not (np.isfinite(mu).all() and np.isfinite(eta).all()):
        raise NonFiniteGeneration("outcome mechanism")
    if not _has_spread(mu):
        raise DegenerateOutcome()
    sigma_mu = float(mu.std())
    scale, eta_std = positivity_scale(eta, floor)
    y = mu + multiplier * sigma_mu * scale * rng.standard_normal(mu.shape[0])
    if not np.isfinite(y).all():
        raise NonFiniteGeneration("outcome noise")
    return OutcomeDraw(y, mu, sigma_mu, eta_std)


def generate_outcome_factual(
    dgp: Dgp, covariates: np.ndarray, t: np.ndarray, rng: np.random.Generator
) -> OutcomeDraw:
    """Y = mu_T(X) + sigma(mu) * scale(eta_Y) * eps on the covariates the DGP was built from."""
    inputs = zscore(covariates, dgp.x_mean, dgp.x_std)[:, dgp.split.outcome_inputs]
    mu, eta = _outcome_forward(dgp, inputs, t)
    return _outcome_from_mechanism(mu, eta, dgp.positivity_floor, dgp.outcome_noise_multiplier, rng)


def _check_t(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise TreatmentOutOfRange(t)


def query_cepo(dgp: Dgp, row_index: int, t: float) -> float:
    """Noise-free mu_t(x_row) with the row's stored exogenous noise."""
    _check_t(t)
    mu, _ = _outcome_forward(dgp, dgp.outcome_inputs, np.full(dgp.outcome_inputs.shape[0], float(t)))
    return float(mu[row_index])


def cepo_surface_three_mlp(dgp: Dgp, t_grid: np.ndarray) -> np.ndarray:
    """mu_t(x_n) for every row and grid point, shape (N, G)."""
    n = dgp.outcome_inputs.shape[0]
    for t in t_grid:
        _check_t(float(t))
    return np.column_stack([_outcome_forward(dgp, dgp.outcome_inputs, np.full(n, float(t)))[0] for t in t_grid])


def query_cepo_curve(dgp: Dgp, row_index: int, t_grid: np.ndarray) -> np.ndarray:
    return cepo_surface_three_mlp(dgp, t_grid)[row_index]


def redraw_factual_outcomes(
    dgp: Dgp | OneMlpDgp, row_index: int, t: float, n_draws: int, rng: np.random.Generator
) -> np.ndarray:
    """Fresh factual outcomes at fixed (x_row, t); only the outcome noise eps is redrawn."""
    _check_t(t)
    n = _row_count(dgp)
    if isinstance(dgp, OneMlpDgp):
        mu, eta = _one_mlp_outcome_forward(dgp, np.full(n, float(t)))
    else:
        mu, eta = _outcome_forward(dgp, dgp.outcome_inputs, np.full(n, float(t)))
    scale, _ = positivity_scale(eta[row_index : row_index + 1], dgp.positivity_floor, dgp.eta_y_std)
    return mu[row_index] + dgp.outcome_noise_multiplier * dgp.sigma_mu * scale[0] * rng.standard_normal(n_draws)


def _row_count(dgp: Dgp | OneMlpDgp) -> int:
    if isinstance(dgp, OneMlpDgp):
        return dgp.treatment_layer_state.shape[0]
    return dgp.outcome_inputs.shape[0]


def _pick(nodes: list[Node], rng: np.random.Generator) -> Node:
    return nodes[int(rng.integers(0, len(nodes)))]


def _counterfactual_treatments(n: int, per_row: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=(n, per_row))


def _assemble_dataset(
    covariates: np.ndarray, t: np.ndarray, y: np.ndarray, t_cf: np.ndarray, cepo_cf: np.ndarray
) -> Dataset:
    dataset = Dataset(
        covariates=covariates,
        t=t,
        y=y,
        t_cf=t_cf[:, 0].copy(),
        cepo_cf=cepo_cf[:, 0].copy(),
        extra_t_cf=t_cf[:, 1:].copy(),
        extra_cepo_cf=cepo_cf[:, 1:].copy(),
    )
    if not dataset.is_finite():
        raise NonFiniteGeneration("dataset assembly")
    for array in dataset.arrays():
        array.setflags(write=False)
    return dataset


# --- samplers --------------------------------------------------------------


def sample_three_mlp(config: RunConfig, seed: int, index: int = 0, attempt: int = 0) -> tuple[Dgp, Dataset]:
    """One attempt at drawing a 3-MLP DGP and its dataset; raises DegenerateDgp on rejection."""
    hp = sample_prior_hyperparams(
        derive_stream(seed, "hyperparams", index, attempt),
        n_samples=config.n_samples,
        max_covariates=config.max_covariates,
    )
    n, k = hp.n_samples, hp.n_covariates

    rng_x = derive_stream(seed, "mlp_x", index, attempt)
    mlp_x = build_random_mlp(hp.layers_x, hp.hidden_x, hp.density_x, frozenset(), rng_x)
    plan = make_corruption_plan(mlp_x.nodes(), k, config.corruption_mode, rng_x)
    covariates = generate_covariates(
        mlp_x, n, k, hp.noise_scale, plan, derive_stream(seed, "covariates", index, attempt)
    )

    split = assign_covariate_roles(k, hp.confounding, derive_stream(seed, "roles", index, attempt))
    t_cols, y_cols = split.treatment_inputs, split.outcome_inputs

    rng_t = derive_stream(seed, "mlp_t", index, attempt)
    mlp_t = build_random_mlp(
        hp.layers_t, hp.hidden_t, hp.density_t, frozenset(), rng_t, in_dim=len(t_cols), out_dim=1
    )
    treatment_input = len(y_cols)
    protected = frozenset((1, j, treatment_input) for j in range(hp.hidden_y))
    rng_y = derive_stream(seed, "mlp_y", index, attempt)
    mlp_y = build_random_mlp(
        hp.layers_y, hp.hidden_y, hp.density_y, protected, rng_y, in_dim=treatment_input + 1, out_dim=1
    )

    rng_noise = derive_stream(seed, "outcome_noise", index, attempt)
    outcome_noise = tuple(
        draw_layer_noise(rng_noise, n, mlp_y.widths[layer], hp.noise_scale)
        for layer in range(1, mlp_y.layer_count)
    )
    x_mean, x_std = column_stats(covariates)
    outcome_inputs = zscore(covariates, x_mean, x_std)[:, y_cols]
    outcome_inputs.setflags(write=False)

    dgp = Dgp(
        hyperparams=hp,
        mlp_x=mlp_x,
        mlp_t=mlp_t,
        mlp_y=mlp_y,
        split=split,
        eta_t_node=_pick(mlp_t.hidden_nodes(), rng_t),
        eta_y_node=_pick(mlp_y.hidden_nodes(), rng_y),
        corruption_plan=plan,
        seed=seed,
        x_mean=x_mean,
        x_std=x_std,
        outcome_inputs=outcome_inputs,
        outcome_noise=outcome_noise,
        positivity=config.positivity_on,
        positivity_floor=config.positivity_floor,
        outcome_noise_multiplier=config.outcome_noise_multiplier,
        index=index,
        retries=attempt,
    )
    treatment = generate_treatment(dgp, covariates, derive_stream(seed, "treatment", index, attempt))
    outcome = generate_outcome_factual(dgp, covariates, treatment.t, derive_stream(seed, "outcome", index, attempt))
    dgp = replace(
        dgp,
        t_minmax=treatment.t_minmax,
        sigma_t_tilde=treatment.sigma_t_tilde,
        sigma_mu=outcome.sigma_mu,
        eta_y_std=outcome.eta_y_std,
    )

    t_cf = _counterfactual_treatments(
        n, config.counterfactuals_per_row, derive_stream(seed, "counterfactual", index, attempt)
    )
    cepo_cf = np.column_stack(
        [_outcome_forward(dgp, outcome_inputs, t_cf[:, c])[0] for c in range(t_cf.shape[1])]
    )
    logger.debug("3-MLP draw index=%d K=%d rho=%.3f s=%.2e", index, k, hp.confounding, hp.noise_scale)
    return dgp, _assemble_dataset(covariates, treatment.t, outcome.y, t_cf, cepo_cf)


def _one_mlp_outcome_forward(dgp: OneMlpDgp, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Set the treatment node to the de-scaled t and re-propagate the downstream layers."""
    t_layer, t_index = dgp.treatment_node
    lo, hi = dgp.t_minmax
    z = dgp.treatment_layer_state.copy()
    z[:, t_index] = lo + t * (hi - lo)
    states = [z] + propagate(dgp.mlp, z, dgp.downstream_noise, start_layer=t_layer + 1)
    out_layer, out_index = dgp.outcome_node
    eta_layer, eta_index = dgp.eta_y_node
    return states[out_layer - t_layer][:, out_index], states[eta_layer - t_layer][:, eta_index]


def cepo_surface_one_mlp(dgp: OneMlpDgp, t_grid: np.ndarray) -> np.ndarray:
    n = dgp.treatment_layer_state.shape[0]
    for t in t_grid:
        _check_t(float(t))
    return np.column_stack([_one_mlp_outcome_forward(dgp, np.full(n, float(t)))[0] for t in t_grid])


def sample_one_mlp(config: RunConfig, seed: int, index: int = 0, attempt: int = 0) -> tuple[OneMlpDgp, Dataset]:
    """Single-MLP ablation: X, T and Y are nodes of one network.

    Covariates come from layers up to the treatment layer; the outcome node sits
    in the last layer. Counterfactuals intervene on the treatment node.
    """
    hp = sample_prior_hyperparams(
        derive_stream(seed, "hyperparams", index, attempt),
        n_samples=config.n_samples,
        max_covariates=config.max_covariates,
    )
    n = hp.n_samples
    rng_m = derive_stream(seed, "mlp_single", index, attempt)
    mlp = build_random_mlp(hp.layers_x, hp.hidden_x, hp.density_x, frozenset(), rng_m)
    last = mlp.layer_count
    t_layer = int(rng_m.integers(1, last))
    upstream = mlp.nodes(1, t_layer)
    treatment_node = _pick(upstream, rng_m)
    upstream = [node for node in upstream if node != treatment_node]
    eta_t_node = _pick(upstream, rng_m)
    eta_y_node = _pick([node for node in mlp.nodes(t_layer, last - 1) if node != treatment_node], rng_m)
    outcome_node = (last, int(rng_m.integers(0, mlp.widths[last])))

    k = min(hp.n_covariates, len(upstream))
    hp = hp.model_copy(update={"n_covariates": k})
    plan = make_corruption_plan(upstream, k, config.corruption_mode, rng_m)

    rng_c = derive_stream(seed, "covariates", index, attempt)
    z0, noise = _draw_mlp_noise(mlp, n, hp.noise_scale, rng_c)
    states = _propagate_corrupted(mlp, z0, noise[:t_layer], plan, rng_c, stop_layer=t_layer)
    covariates = _collect_covariates(states, plan, rng_c)

    treatment = _treatment_from_mechanism(
        states[treatment_node[0] - 1][:, treatment_node[1]].copy(),
        states[eta_t_node[0] - 1][:, eta_t_node[1]],
        config.positivity_on,
        config.positivity_floor,
        derive_stream(seed, "treatment", index, attempt),
    )
    state = states[t_layer - 1].copy()
    state.setflags(write=False)
    dgp = OneMlpDgp(
        hyperparams=hp,
        mlp=mlp,
        covariate_nodes=plan,
        treatment_node=treatment_node,
        eta_t_node=eta_t_node,
        eta_y_node=eta_y_node,
        outcome_node=outcome_node,
        seed=seed,
        treatment_layer_state=state,
        downstream_noise=tuple(noise[t_layer:]),
        positivity=config.positivity_on,
        positivity_floor=config.positivity_floor,
        outcome_noise_multiplier=config.outcome_noise_multiplier,
        t_minmax=treatment.t_minmax,
        sigma_t_tilde=treatment.sigma_t_tilde,
        index=index,
        retries=attempt,
    )
    mu, eta = _one_mlp_outcome_forward(dgp, treatment.t)
    outcome = _outcome_from_mechanism(
        mu, eta, config.positivity_floor, config.outcome_noise_multiplier, derive_stream(seed, "outcome", index, attempt)
    )
    dgp = replace(dgp, sigma_mu=outcome.sigma_mu, eta_y_std=outcome.eta_y_std)

    t_cf = _counterfactual_treatments(
        n, config.counterfactuals_per_row, derive_stream(seed, "counterfactual", index, attempt)
    )
    cepo_cf = np.column_stack([_one_mlp_outcome_forward(dgp, t_cf[:, c])[0] for c in range(t_cf.shape[1])])
    if not np.isfinite(cepo_cf).all():
        raise NonFiniteGeneration("counterfactual pass")
    logger.debug("1-MLP draw index=%d K=%d treatment node=%s", index, k, treatment_node)
    return dgp, _assemble_dataset(covariates, treatment.t, outcome.y, t_cf, cepo_cf)


def query_cepo_one_mlp(dgp: OneMlpDgp, row_index: int, t: float) -> float:
    _check_t(t)
    n = dgp.treatment_layer_state.shape[0]
    return float(_one_mlp_outcome_forward(dgp, np.full(n, float(t)))[0][row_index])


def treatment_edges_protected(dgp: Dgp) -> bool:
    """True when every first-layer edge out of the treatment input of mlp_y is kept."""
    return bool(dgp.mlp_y.masks[0][:, -1].all())


def structurally_unconfounded(dgp: Dgp, covariates: np.ndarray, shift: float = 3.0) -> bool:
    """True when shifting treatment-only columns leaves mu_t(x) unchanged and shifting
    outcome-only columns leaves T~ unchanged. ``covariates`` are the DGP's N raw rows.
    """
    moved_t, moved_y = covariates.copy(), covariates.copy()
    moved_t[:, list(dgp.split.t_only_indices)] += shift
    moved_y[:, list(dgp.split.y_only_indices)] += shift
    t = np.full(covariates.shape[0], 0.5)

    def outcome(x: np.ndarray) -> np.ndarray:
        return _outcome_forward(dgp, zscore(x, dgp.x_mean, dgp.x_std)[:, dgp.split.outcome_inputs], t)[0]

    def treatment(x: np.ndarray) -> np.ndarray:
        return _treatment_forward(dgp, x, derive_stream(dgp.seed, "wiring/treatment", dgp.index))[0]

    return bool(
        np.array_equal(outcome(covariates), outcome(moved_t))
        and np.array_equal(treatment(covariates), treatment(moved_y))
    )


