"""Self-check command."""

import typer

from ccgen.exceptions.base import EXIT_NUMERIC
from ccgen.log import get_logger
from ccgen.models.ppd import BinGrid
from ccgen.operations.selfcheck_ops import run_selfcheck

logger = get_logger(__name__)


def selfcheck(
    corrupt_grid: bool = typer.Option(False, "--corrupt-grid", hidden=True),
) -> None:
    """Run the fast invariant suite; exits nonzero if any check fails."""
    grid = BinGrid.uniform(1024, -10.0, 10.0)
    if corrupt_grid:
        grid = BinGrid(grid.edges[::-1].copy())
    results = run_selfcheck(grid)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        typer.echo(f"{status} {result.name} ({result.detail}) {result.seconds:.2f}s")
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error("%d of %d checks failed: %s", len(failed), len(results), ", ".join(failed))
        raise typer.Exit(code=EXIT_NUMERIC)
    typer.echo(f"all {len(results)} checks passed")


COMMANDS = {"selfcheck": selfcheck}
