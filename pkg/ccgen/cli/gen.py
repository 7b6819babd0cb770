"""Dataset generation command."""

from pathlib import Path
from typing import Any, Optional

import typer
from joblib import Parallel, delayed

from ccgen.core import ConfigOption, output_path, run_config
from ccgen.log import get_logger
from ccgen.models.config import CorruptionMode, PriorKind, RunConfig, Toggle
from ccgen.operations.dgp_io import dgp_spec, save_dgp_spec
from ccgen.operations.dgp_ops import sample_dgp_dataset, summarize
from ccgen.operations.table_ops import table_from_dataset, write_benchmark_csv
from ccgen.settings import settings

logger = get_logger(__name__)


def generate_one(config: RunConfig, seed: int, index: int, out_dir: Path) -> dict[str, Any]:
    """Sample DGP ``index`` and write dgp_<index>.csv plus its spec."""
    dgp, dataset = sample_dgp_dataset(config, seed, index)
    stem = out_dir / f"dgp_{index:04d}"
    write_benchmark_csv(table_from_dataset(dataset), stem.with_suffix(".csv"))
    save_dgp_spec(dgp_spec(dgp, dataset, config), stem.with_suffix(".spec.json"))
    return summarize(dgp, dataset)


def gen(
    config_path: Optional[Path] = ConfigOption,
    prior: Optional[PriorKind] = typer.Option(None, help="Prior to sample from."),
    corruption: Optional[CorruptionMode] = typer.Option(None, help="Tabular corruption placement."),
    positivity: Optional[Toggle] = typer.Option(None, help="Heteroscedastic treatment noise."),
    seed: Optional[int] = typer.Option(None, help="Root seed."),
    n_samples: Optional[int] = typer.Option(None, "--n-samples", help="Rows per dataset."),
    count: int = typer.Option(1, min=1, help="Number of datasets."),
    out: Optional[Path] = typer.Option(None, help="Output directory."),
    threads: int = typer.Option(settings.threads, min=1, help="Parallel workers, capped by CCGEN_THREADS."),
) -> None:
    """Sample DGPs and write benchmark CSVs with replayable DGP specs."""
    config = run_config(
        config_path,
        prior=prior,
        corruption_mode=corruption,
        positivity=positivity,
        seed=seed,
        n_samples=n_samples,
    )
    out_dir = output_path(out, "gen")
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = min(threads, settings.threads, count)
    logger.info("Generating %d datasets with %d workers into %s", count, workers, out_dir)
    summaries = Parallel(n_jobs=workers)(
        delayed(generate_one)(config, config.seed, index, out_dir) for index in range(count)
    )
    for summary in summaries:
        typer.echo(
            "index={index} N={n} K={k} rho={rho} retries={retries}".format(**summary)
        )


COMMANDS = {"gen": gen}
