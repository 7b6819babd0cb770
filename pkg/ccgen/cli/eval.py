"""Evaluation command: k-fold MISE/DPE and held-out comparison."""

from pathlib import Path
from typing import Optional

import pandas as pd
import typer

from ccgen.core import ConfigOption, output_path, run_config
from ccgen.exceptions.base import UsageError
from ccgen.log import get_logger
from ccgen.models.config import PriorKind, RunConfig
from ccgen.models.evaluation import EvalSource
from ccgen.operations.checkpoint_ops import load_checkpoint
from ccgen.operations.eval_ops import evaluate_with_curves, report_text, treatment_grid, write_report
from ccgen.operations.predictor_ops import BASELINES, ToyPredictor, baseline_predictor, compare_on_prior
from ccgen.operations.source_ops import csv_source, generated_source, scenario_source, spec_source
from ccgen.operations.table_ops import FLOAT_FORMAT

logger = get_logger(__name__)


def _source(
    config: RunConfig,
    scenario_id: Optional[str],
    covariates: Optional[Path],
    spec: Optional[Path],
    data: Optional[Path],
    index: int,
) -> EvalSource:
    given = [name for name, value in (("--scenario", scenario_id), ("--spec", spec), ("--data", data)) if value]
    if len(given) > 1:
        raise UsageError(f"Choose one data source, got {' and '.join(given)}")
    if scenario_id:
        return scenario_source(scenario_id, config.seed, covariates)
    if spec:
        return spec_source(spec)
    if data:
        return csv_source(data)
    return generated_source(config, config.seed, index)


def _compare(model, config: RunConfig, count: int, out_dir: Path) -> None:
    seeds = [config.seed + 1 + i for i in range(count)]
    rows = compare_on_prior(model, config, seeds)
    if not rows:
        raise UsageError("No held-out DGP could be sampled")
    frame = pd.DataFrame([row.model_dump() for row in rows])
    out_dir.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_dir / "comparison.csv", index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    typer.echo(
        f"held_out={len(rows)} "
        f"beats_context_mean={sum(r.beats_context_mean for r in rows) / len(rows):.3f} "
        f"beats_knn={sum(r.beats_knn for r in rows) / len(rows):.3f}"
    )


def evaluate(
    config_path: Optional[Path] = ConfigOption,
    checkpoint: Optional[Path] = typer.Option(None, help="Toy-model checkpoint to evaluate."),
    baseline: Optional[str] = typer.Option(None, help=f"Baseline instead of a model: {', '.join(BASELINES)}."),
    scenario_id: Optional[str] = typer.Option(None, "--scenario", help="Builtin scenario id."),
    covariates: Optional[Path] = typer.Option(None, help="Real covariates for --scenario."),
    spec: Optional[Path] = typer.Option(None, help="DGP spec JSON written by gen."),
    data: Optional[Path] = typer.Option(None, help="Benchmark CSV with a .meta.json or .spec.json sidecar."),
    prior: Optional[PriorKind] = typer.Option(None, help="Prior for a freshly generated dataset."),
    index: int = typer.Option(0, min=0, help="DGP index for a freshly generated dataset."),
    seed: Optional[int] = typer.Option(None, help="Seed for folds, scenarios and generated data."),
    folds: Optional[int] = typer.Option(None, help="Number of folds."),
    grid_points: Optional[int] = typer.Option(None, "--grid-points", help="Treatment grid size."),
    compare: int = typer.Option(0, min=0, help="Also score the model against baselines on this many fresh DGPs."),
    out: Optional[Path] = typer.Option(None, help="Report directory."),
) -> None:
    """Score a checkpoint or a baseline with the k-fold MISE/DPE protocol."""
    if (checkpoint is None) == (baseline is None):
        raise UsageError("Pass exactly one of --checkpoint or --baseline")
    overrides = dict(prior=prior, seed=seed, folds=folds, grid_points=grid_points)
    model = None
    if checkpoint is not None:
        if config_path is not None:
            raise UsageError("A checkpoint carries its own configuration; drop --config")
        model, trained = load_checkpoint(checkpoint)
        config = trained.with_overrides(**overrides)
        logger.info("Loaded %s (prior=%s)", checkpoint, config.prior.value)
    else:
        config = run_config(config_path, **overrides)
    if compare and model is None:
        raise UsageError("--compare needs --checkpoint")

    source = _source(config, scenario_id, covariates, spec, data, index)
    predictor = ToyPredictor(model, config) if model is not None else baseline_predictor(baseline, source, config)
    report, curves = evaluate_with_curves(
        predictor,
        source,
        treatment_grid(config.grid_points),
        k=config.folds,
        seed=config.seed,
        config={
            "checkpoint": str(checkpoint) if checkpoint else None,
            "prior": config.prior.value,
            "knn_neighbors": config.knn_neighbors,
        },
    )
    out_dir = output_path(out, "eval")
    write_report(report, out_dir, curves)
    typer.echo(report_text(report), nl=False)
    if compare:
        _compare(model, config, compare, out_dir)


COMMANDS = {"eval": evaluate}
