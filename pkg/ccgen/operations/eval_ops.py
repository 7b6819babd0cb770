"""MISE and DPE against ground-truth oracles, and the k-fold evaluation protocol."""

from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from sklearn.model_selection import KFold

from ccgen.exceptions.data import GridMismatch, InsufficientContext
from ccgen.log import get_logger
from ccgen.models.evaluation import CurvePredictor, DpeComputation, EvalReport, EvalSource
from ccgen.models.prior import Dataset
from ccgen.models.scenario import OptimumMode, RealizedScenario
from ccgen.operations.dgp_ops import cepo_surface
from ccgen.operations.rng_ops import derive_seed

logger = get_logger(__name__)


def treatment_grid(points: int = 65, a: float = 0.0, b: float = 1.0) -> np.ndarray:
    return np.linspace(a, b, points)


# --- metrics ---------------------------------------------------------------


def mise(
    pred: np.ndarray, truth: np.ndarray, grid: np.ndarray, a: float | None = None, b: float | None = None
) -> float:
    """(1/N) sum_n (1/(b-a)) int_a^b (pred - truth)^2 dt, composite trapezoid on the grid."""
    pred, truth, grid = np.atleast_2d(pred), np.atleast_2d(truth), np.asarray(grid, dtype=float)
    a = float(grid[0]) if a is None else a
    b = float(grid[-1]) if b is None else b
    if pred.shape != truth.shape or pred.shape[-1] != grid.shape[0]:
        raise GridMismatch(f"Curve shapes {pred.shape} and {truth.shape} on a grid of {grid.shape[0]} points")
    if grid.shape[0] < 2 or not np.isclose(grid[0], a) or not np.isclose(grid[-1], b) or not b > a:
        raise GridMismatch(f"Grid must have at least 2 points spanning [{a}, {b}]")
    integral = trapezoid((pred - truth) ** 2, x=grid, axis=-1)
    return float(np.mean(integral / (b - a)))


def _arg_opt(curves: np.ndarray, mode: OptimumMode) -> np.ndarray:
    # argmax/argmin return the first hit, i.e. the smallest t on an ascending mesh
    if mode is OptimumMode.MAX:
        return np.argmax(curves, axis=-1)
    if mode is OptimumMode.MIN:
        return np.argmin(curves, axis=-1)
    raise ValueError(f"DPE undefined for optimum mode {mode.value}")


def dpe_details(pred: np.ndarray, truth: np.ndarray, mesh: np.ndarray, mode: OptimumMode | str) -> DpeComputation:
    mode = OptimumMode(mode)
    pred, truth, mesh = np.atleast_2d(pred), np.atleast_2d(truth), np.asarray(mesh, dtype=float)
    if pred.shape != truth.shape or pred.shape[-1] != mesh.shape[0]:
        raise GridMismatch()
    star = _arg_opt(truth, mode)
    hat = _arg_opt(pred, mode)
    rows = np.arange(truth.shape[0])
    gap = truth[rows, star] - truth[rows, hat]
    return DpeComputation(mesh=mesh, mode=mode, t_star=mesh[star], t_hat_star=mesh[hat], value=float(np.mean(gap**2)))


def dpe(pred: np.ndarray, truth: np.ndarray, mesh: np.ndarray, mode: OptimumMode | str) -> float:
    """(1/N) sum_n (mu_{t*}(x_n) - mu_{t^*}(x_n))^2 with both optima taken on the mesh."""
    return dpe_details(pred, truth, mesh, mode).value


def kfold_split(n: int, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Shuffled, disjoint, exhaustive folds whose sizes differ by at most one."""
    if n < k:
        raise InsufficientContext(f"Cannot split {n} rows into {k} folds")
    splitter = KFold(n_splits=k, shuffle=True, random_state=derive_seed(seed, "kfold"))
    return [np.sort(test) for _, test in splitter.split(np.zeros((n, 1)))]


# --- sources ---------------------------------------------------------------


def source_from_dgp(
    dgp: Any, dataset: Dataset, name: str = "prior", mode: OptimumMode = OptimumMode.MAX
) -> EvalSource:
    """The optimal dose maximizes mu_t(x) unless ``mode`` says otherwise."""
    return EvalSource(
        name=name,
        covariates=np.asarray(dataset.covariates),
        t=np.asarray(dataset.t),
        y=np.asarray(dataset.y),
        surface=lambda grid: cepo_surface(dgp, grid),
        optimum_mode=mode,
    )


def source_from_scenario(realized: RealizedScenario) -> EvalSource:
    table = realized.table
    return EvalSource(
        name=realized.scenario.name,
        covariates=table.covariates,
        t=table.t,
        y=table.y,
        surface=lambda grid: cepo_surface(realized, grid),
        optimum_mode=realized.scenario.optimum_mode,
    )


# --- protocol --------------------------------------------------------------


def _population_std(values: list[float]) -> float:
    return float(np.std(values))


def evaluate_with_curves(
    predictor: CurvePredictor,
    source: EvalSource,
    grid: np.ndarray,
    k: int = 5,
    seed: int = 0,
    config: dict[str, Any] | None = None,
) -> tuple[EvalReport, pd.DataFrame]:
    """k-fold protocol: each fold is queried with the other folds as factual context."""
    grid = np.asarray(grid, dtype=float)
    truth = source.surface(grid)
    folds = kfold_split(source.n_rows, k, seed)
    skip_dpe = source.optimum_mode is OptimumMode.MONOTONE
    fold_mise, fold_dpe, curves = [], [], []

    for fold, rows in enumerate(folds):
        context_rows = np.setdiff1d(np.arange(source.n_rows), rows, assume_unique=True)
        predicted = np.asarray(
            predictor.predict(source.context(context_rows), source.covariates[rows], grid, rows), dtype=float
        )
        if predicted.shape != (rows.shape[0], grid.shape[0]):
            raise GridMismatch(f"{predictor.name} returned shape {predicted.shape}")
        if not np.isfinite(predicted).all():
            raise GridMismatch(f"{predictor.name} returned non-finite curves")
        fold_mise.append(mise(predicted, truth[rows], grid))
        if not skip_dpe:
            fold_dpe.append(dpe(predicted, truth[rows], grid, source.optimum_mode))
        logger.info(
            "Fold %d/%d %s: MISE=%.6g%s",
            fold + 1, k, predictor.name, fold_mise[-1], "" if skip_dpe else f" DPE={fold_dpe[-1]:.6g}",
        )
        curves.append(
            pd.DataFrame(
                {
                    "fold": fold,
                    "row": np.repeat(rows, grid.shape[0]),
                    "t": np.tile(grid, rows.shape[0]),
                    "predicted": predicted.ravel(),
                    "true": truth[rows].ravel(),
                }
            )
        )

    report = EvalReport(
        predictor=predictor.name,
        source=source.name,
        folds=k,
        seed=seed,
        grid_points=grid.shape[0],
        per_fold_mise=fold_mise,
        per_fold_dpe=None if skip_dpe else fold_dpe,
        mise_mean=float(np.mean(fold_mise)),
        mise_std=_population_std(fold_mise),
        dpe_mean=None if skip_dpe else float(np.mean(fold_dpe)),
        dpe_std=None if skip_dpe else _population_std(fold_dpe),
        dpe_skipped=skip_dpe,
        config=config or {},
    )
    return report, pd.concat(curves, ignore_index=True)


def evaluate_predictor(
    predictor: CurvePredictor,
    source: EvalSource,
    grid: np.ndarray,
    k: int = 5,
    seed: int = 0,
    config: dict[str, Any] | None = None,
) -> EvalReport:
    return evaluate_with_curves(predictor, source, grid, k, seed, config)[0]


# --- report files ----------------------------------------------------------


def _format(value: Any) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, list):
        return ",".join(_format(v) for v in value)
    return str(value)


def report_text(report: EvalReport) -> str:
    lines = []
    for key, value in report.model_dump(exclude={"config"}).items():
        lines.append(f"{key}: {_format(value)}")
    for key, value in sorted(report.config.items()):
        lines.append(f"config.{key}: {_format(value)}")
    return "\n".join(lines) + "\n"


def fold_frame(report: EvalReport) -> pd.DataFrame:
    frame = pd.DataFrame({"fold": range(report.folds), "mise": report.per_fold_mise})
    frame["dpe"] = report.per_fold_dpe if report.per_fold_dpe is not None else np.nan
    return frame


def write_report(report: EvalReport, out_dir: str | Path, curves: pd.DataFrame | None = None) -> list[Path]:
    """report.txt (key: value), folds.csv and, when given, curves.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / "report.txt", out_dir / "folds.csv"]
    written[0].write_text(report_text(report), encoding="utf-8")
    fold_frame(report).to_csv(written[1], index=False, float_format="%.17g", lineterminator="\n", na_rep="")
    if curves is not None:
        written.append(out_dir / "curves.csv")
        curves.to_csv(written[-1], index=False, float_format="%.17g", lineterminator="\n")
    for path in written:
        logger.info("Wrote %s", path)
    return written
