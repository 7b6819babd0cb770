"""Scenario realization and the builtin synthetic scenarios.

Builtin scenarios are synthetic stand-ins; they do not reproduce any licensed
semi-synthetic benchmark.
"""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy.special import expit

from ccgen.exceptions.base import UsageError
from ccgen.exceptions.data import UnknownScenario
from ccgen.log import get_logger
from ccgen.models.scenario import (
    BUILTIN_GAUSSIAN,
    OptimumMode,
    RealizedScenario,
    Scenario,
    ScenarioMetadata,
)
from ccgen.models.table import BenchmarkTable
from ccgen.operations.dgp_ops import cepo_surface
from ccgen.operations.prior_ops import column_stats
from ccgen.operations.rng_ops import derive_stream
from ccgen.operations.table_ops import load_covariates

logger = get_logger(__name__)

MIN_SHARED_FRACTION = 0.5
TREATMENT_NOISE = 0.3


# --- feature sets ----------------------------------------------------------


def all_features(k: int) -> tuple[int, ...]:
    return tuple(range(k))


def shared_features(k: int) -> tuple[int, ...]:
    """The first ceil(k/2) covariates."""
    return tuple(range(max(1, -(-k // 2))))


def _loadings(k: int, phase: float) -> np.ndarray:
    # fixed, seed-free weights so that dose-response maps are deterministic
    idx = np.arange(k, dtype=float)
    w = np.cos(1.3 * idx + phase)
    return w / np.sqrt(max(k, 1))


def _index(x: np.ndarray, features: tuple[int, ...], phase: float) -> np.ndarray:
    cols = x[:, list(features)]
    return cols @ _loadings(cols.shape[1], phase)


# --- builtin scenarios -----------------------------------------------------


def _linear_treatment(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return np.tanh(_index(x, all_features(x.shape[1]), 0.0)) + TREATMENT_NOISE * rng.standard_normal(x.shape[0])


def _vshape_optimum(x: np.ndarray) -> np.ndarray:
    return 0.5 + 0.35 * np.tanh(_index(x, shared_features(x.shape[1]), 0.4))


def _vshape_response(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    slope = 1.0 + expit(_index(x, shared_features(x.shape[1]), 1.7))
    return slope * np.abs(t - _vshape_optimum(x))


def _saturating_response(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    shared = shared_features(x.shape[1])
    height = 0.5 + np.logaddexp(0.0, _index(x, shared, 0.9))
    half = 0.1 + 0.4 * expit(_index(x, shared, 2.2))
    return height * t / (t + half)


_BUILTINS = {
    "vshape": dict(dose_response_fn=_vshape_response, optimum_mode=OptimumMode.MIN),
    "monotone_saturating": dict(dose_response_fn=_saturating_response, optimum_mode=OptimumMode.MONOTONE),
}


def builtin_scenario(scenario_id: str) -> Scenario:
    """vshape: a(x)|t - t*(x)|, minimized at t*(x). monotone_saturating: b(x) t / (t + c(x))."""
    try:
        spec = _BUILTINS[scenario_id]
    except KeyError:
        raise UnknownScenario(scenario_id) from None
    return Scenario(
        name=scenario_id,
        covariate_source=BUILTIN_GAUSSIAN,
        treatment_fn=_linear_treatment,
        treatment_features=all_features,
        outcome_features=shared_features,
        **spec,
    )


def builtin_scenario_ids() -> list[str]:
    return sorted(_BUILTINS)


# --- realization -----------------------------------------------------------


def confounding_fraction(scenario: Scenario, k: int) -> float:
    """Share of the K covariates read by both the treatment and the dose-response map."""
    shared = set(scenario.treatment_features(k)) & set(scenario.outcome_features(k))
    return len(shared) / k


def scenario_covariates(scenario: Scenario, seed: int) -> np.ndarray:
    if scenario.covariate_source == BUILTIN_GAUSSIAN:
        rng = derive_stream(seed, "scenario/covariates")
        base = rng.standard_normal((scenario.n_rows, scenario.n_covariates))
        # mild correlation between neighbouring columns
        return base + 0.5 * np.roll(base, 1, axis=1)
    return load_covariates(scenario.covariate_source)


def _min_max(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        return np.full_like(values, 0.5)
    return (values - lo) / (hi - lo)


def realize_scenario(scenario: Scenario, seed: int) -> RealizedScenario:
    """Draw t, y and one uniform (t_test, cepo_test) pair per row.

    t is min-max scaled to [0, 1]; y = f(x, t) + N(0, outcome_noise_std^2).
    """
    covariates = scenario_covariates(scenario, seed)
    k = covariates.shape[1]
    fraction = confounding_fraction(scenario, k)
    if fraction < MIN_SHARED_FRACTION:
        raise UsageError(f"Scenario {scenario.name} shares {fraction:.0%} of covariates, need 50%")
    x_mean, x_std = column_stats(covariates)
    x = (covariates - x_mean) / x_std

    t = _min_max(scenario.treatment_fn(x, derive_stream(seed, "scenario/treatment")))
    noise = derive_stream(seed, "scenario/noise").standard_normal(x.shape[0])
    y = scenario.dose_response_fn(x, t) + scenario.outcome_noise_std * noise
    t_test = derive_stream(seed, "scenario/t_test").uniform(0.0, 1.0, size=x.shape[0])
    table = BenchmarkTable(
        covariates=covariates,
        t=t,
        y=y,
        t_test=t_test,
        cepo_test=scenario.dose_response_fn(x, t_test),
    )
    logger.debug("Realized scenario %s: N=%d K=%d", scenario.name, table.n_rows, k)
    return RealizedScenario(scenario=scenario, seed=seed, x_mean=x_mean, x_std=x_std, table=table)


@cepo_surface.register
def _(realized: RealizedScenario, t_grid: np.ndarray) -> np.ndarray:
    x = realized.features
    n = x.shape[0]
    fn = realized.scenario.dose_response_fn
    return np.column_stack([fn(x, np.full(n, float(t))) for t in np.asarray(t_grid, dtype=float)])


def resolve_scenario(scenario_id: str, covariate_path: str | Path | None = None) -> Scenario:
    scenario = builtin_scenario(scenario_id)
    if covariate_path is not None:
        scenario = replace(scenario, covariate_source=str(covariate_path))
    return scenario


# --- metadata sidecar ------------------------------------------------------


def metadata_path(csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".meta.json")


def write_scenario_metadata(realized: RealizedScenario, csv_path: str | Path) -> Path:
    scenario = realized.scenario
    meta = ScenarioMetadata(
        name=scenario.name,
        seed=realized.seed,
        covariate_source=scenario.covariate_source,
        optimum_mode=scenario.optimum_mode,
        dpe_skipped=scenario.dpe_skipped,
        n_rows=realized.table.n_rows,
        n_covariates=realized.table.n_covariates,
        outcome_noise_std=scenario.outcome_noise_std,
    )
    path = metadata_path(csv_path)
    path.write_text(meta.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_scenario_metadata(csv_path: str | Path) -> ScenarioMetadata | None:
    path = metadata_path(csv_path)
    if not path.is_file():
        return None
    return ScenarioMetadata.model_validate(json.loads(path.read_text(encoding="utf-8")))
