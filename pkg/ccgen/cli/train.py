"""Toy-model training command."""

from pathlib import Path
from typing import Optional

import pandas as pd
import typer

from ccgen.core import ConfigOption, output_path, run_config
from ccgen.log import get_logger
from ccgen.models.config import CorruptionMode, LossKind, OptimizerKind, PriorKind, Toggle
from ccgen.operations.checkpoint_ops import save_checkpoint
from ccgen.operations.table_ops import FLOAT_FORMAT
from ccgen.operations.toy_model import count_parameters
from ccgen.operations.train_ops import train_prior_model

logger = get_logger(__name__)


def train(
    config_path: Optional[Path] = ConfigOption,
    steps: int = typer.Option(200, min=1, help="Optimizer steps, one fresh DGP each."),
    seed: Optional[int] = typer.Option(None, help="Root seed."),
    prior: Optional[PriorKind] = typer.Option(None, help="Prior to train on."),
    loss: Optional[LossKind] = typer.Option(None, help="Training loss."),
    corruption: Optional[CorruptionMode] = typer.Option(None, help="Tabular corruption placement."),
    positivity: Optional[Toggle] = typer.Option(None, help="Heteroscedastic treatment noise."),
    optimizer: Optional[OptimizerKind] = typer.Option(None, help="Optimizer."),
    learning_rate: Optional[float] = typer.Option(None, "--lr", help="Learning rate."),
    train_rows: Optional[int] = typer.Option(None, "--train-rows", help="Rows drawn from each DGP."),
    checkpoint: Optional[Path] = typer.Option(None, help="Checkpoint output path."),
    loss_log: Optional[Path] = typer.Option(None, "--loss-log", help="Per-step loss CSV."),
) -> None:
    """Train the toy in-context model on freshly sampled DGPs."""
    config = run_config(
        config_path,
        seed=seed,
        prior=prior,
        loss=loss,
        corruption_mode=corruption,
        positivity=positivity,
        optimizer=optimizer,
        learning_rate=learning_rate,
        train_rows=train_rows,
    )
    trainer, records = train_prior_model(config, steps)
    ckpt = save_checkpoint(trainer.model, config, output_path(checkpoint, "model.ckpt"))

    log_path = output_path(loss_log, "loss.csv")
    log_path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(records, columns=["step", "loss", "dgp_index", "resamples"]).to_csv(
        log_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    logger.info("Wrote loss log to %s", log_path)
    typer.echo(
        f"steps={len(records)} params={count_parameters(trainer.model)} "
        f"first_loss={records[0].loss:.6g} last_loss={records[-1].loss:.6g} checkpoint={ckpt}"
    )


COMMANDS = {"train": train}
