"""Exception handlers mapping failures to process exit codes."""

import importlib

import typer

from ccgen.exceptions.base import EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE, CcgenException
from ccgen.log import get_logger

logger = get_logger(__name__)


def _usage_error_types() -> tuple[type[Exception], ...]:
    """Click exception bases: the copy vendored by newer Typer and standalone click."""
    found = []
    for module in ("typer._click.exceptions", "click.exceptions"):
        try:
            found.append(importlib.import_module(module).ClickException)
        except (ImportError, AttributeError):
            continue
    return tuple(found)


USAGE_ERRORS = _usage_error_types()


def ccgen_exception_handler(exc: CcgenException) -> int:
    """Handle ccgen custom exceptions."""
    logger.error("ccgen exception: %s", exc.detail)
    typer.echo(f"error: {exc.detail} [{exc.__class__.__name__}]", err=True)
    return exc.exit_code


def usage_exception_handler(exc: Exception) -> int:
    """Handle Click usage errors (unknown flags, bad values)."""
    exc.show()
    return EXIT_USAGE


def os_exception_handler(exc: OSError) -> int:
    """Handle I/O failures."""
    logger.error("I/O failure: %s", exc)
    typer.echo(f"error: {exc}", err=True)
    return EXIT_DATA


def general_exception_handler(exc: Exception) -> int:
    """Handle general exceptions."""
    logger.error("Unhandled exception: %s", str(exc))
    typer.echo(f"error: {exc} [{exc.__class__.__name__}]", err=True)
    return EXIT_NUMERIC


def handle_exception(exc: BaseException) -> int:
    """Dispatch an exception to its handler and return the exit code."""
    if isinstance(exc, CcgenException):
        return ccgen_exception_handler(exc)
    if isinstance(exc, USAGE_ERRORS):
        return usage_exception_handler(exc)
    if isinstance(exc, OSError):
        return os_exception_handler(exc)
    return general_exception_handler(exc)
