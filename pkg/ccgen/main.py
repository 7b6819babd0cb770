"""Main ccgen command-line entry point."""

import time
from collections.abc import Sequence
from uuid import uuid4

from ccgen.core import setup_cli
from ccgen.exceptions.base import EXIT_OK
from ccgen.exceptions.handlers import handle_exception
from ccgen.log import get_logger
from ccgen.settings import settings

# Commands
from ccgen.cli import eval as eval_cli
from ccgen.cli import gen, scenario, selfcheck, train

logger = get_logger(__name__)


def create_app():
  """Create the Typer application and register every command module."""
  app = setup_cli()

  logger.debug("=== ccgen settings ===")
  logger.debug("Threads: %s", settings.threads)
  logger.debug("Output directory: %s", settings.output_dir)

  for module in (gen, scenario, train, eval_cli, selfcheck):
    for name, command in module.COMMANDS.items():
      app.command(name)(command)

  return app


def main(argv: Sequence[str] | None = None) -> int:
  """Run one command and map its outcome to an exit code."""
  rid = uuid4()
  start_time = time.perf_counter()
  logger.debug("%s - beg - %s", rid, " ".join(argv) if argv is not None else "<sys.argv>")
  try:
    result = app(args=list(argv) if argv is not None else None, standalone_mode=False)
    code = result if isinstance(result, int) else EXIT_OK
  except Exception as exc:
    code = handle_exception(exc)
  logger.debug("%s - end - exit %d - %.2f seconds", rid, code, time.perf_counter() - start_time)
  return code


# Create the Typer app instance
app = create_app()
