"""Scenario realization command."""

from pathlib import Path
from typing import Optional

import typer

from ccgen.core import output_path
from ccgen.log import get_logger
from ccgen.operations.scenario_ops import (
    builtin_scenario_ids,
    realize_scenario,
    resolve_scenario,
    write_scenario_metadata,
)
from ccgen.operations.table_ops import write_benchmark_csv

logger = get_logger(__name__)


def scenario(
    scenario_id: str = typer.Argument(..., help=f"One of: {', '.join(builtin_scenario_ids())}."),
    covariates: Optional[Path] = typer.Option(None, help="CSV of real covariates; default draws Gaussian ones."),
    seed: int = typer.Option(0, min=0, help="Realization seed."),
    out: Optional[Path] = typer.Option(None, help="Output CSV; a .meta.json sidecar is written next to it."),
) -> None:
    """Realize a scenario into a benchmark CSV."""
    realized = realize_scenario(resolve_scenario(scenario_id, covariates), seed)
    csv_path = write_benchmark_csv(realized.table, output_path(out, f"{scenario_id}_{seed}.csv"))
    meta = write_scenario_metadata(realized, csv_path)
    logger.info("Wrote %s and %s", csv_path, meta)
    typer.echo(
        f"scenario={scenario_id} N={realized.table.n_rows} K={realized.table.n_covariates} "
        f"optimum={realized.scenario.optimum_mode.value} path={csv_path}"
    )


COMMANDS = {"scenario": scenario}
