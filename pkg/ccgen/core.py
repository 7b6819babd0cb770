"""Common CLI functions and Typer setup."""

from pathlib import Path
from typing import Any, Optional

import typer

from ccgen import __version__
from ccgen.log import get_logger
from ccgen.models.config import RunConfig, load_config
from ccgen.settings import settings

logger = get_logger(__name__)

ConfigOption = typer.Option(None, "--config", "-c", help="Flat key=value configuration file.")


def version_callback(value: bool) -> None:
    if value:
        typer.echo(f"ccgen {__version__}")
        raise typer.Exit()


def setup_cli() -> typer.Typer:
    """Create the Typer application with shared settings.

    Returns:
        typer.Typer: application without commands; ``ccgen.main`` registers them.
    """
    app = typer.Typer(
        name="ccgen",
        help="Continuous-treatment causal prior: datasets, scenarios, toy model training and evaluation.",
        no_args_is_help=True,
        add_completion=False,
        pretty_exceptions_enable=False,
    )

    @app.callback()
    def root(
        version: Optional[bool] = typer.Option(
            None, "--version", callback=version_callback, is_eager=True, help="Show the version and exit."
        ),
    ) -> None:
        logger.debug("Settings: %s", settings.model_dump_json())

    return app


def run_config(config_path: Optional[Path], **overrides: Any) -> RunConfig:
    """Resolve defaults < file < flags and log the effective configuration."""
    config = load_config(config_path, **overrides)
    logger.info("=== ccgen configuration ===")
    logger.info(
        "prior=%s corruption=%s positivity=%s loss=%s seed=%d",
        config.prior.value, config.corruption_mode.value, config.positivity.value, config.loss.value, config.seed,
    )
    logger.debug(config.model_dump_json(indent=2))
    return config


def output_path(path: Optional[Path], default_name: str) -> Path:
    return path if path is not None else Path(settings.output_dir) / default_name
