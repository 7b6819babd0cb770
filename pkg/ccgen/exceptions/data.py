"""Data and file exception classes."""

from ccgen.exceptions.base import DataError, UsageError


class ParseError(DataError):
    """A cell could not be parsed."""

    def __init__(self, detail: str, row: int | None = None, column: str | None = None):
        if row is not None or column is not None:
            detail = f"{detail} (row {row}, column {column!r})"
        super().__init__(detail=detail)
        self.row = row
        self.column = column


class EmptyTable(DataError):
    """No usable rows."""

    def __init__(self, source: str = ""):
        super().__init__(detail=f"Table has no usable rows: {source}" if source else "Table has no usable rows")


class HeaderMismatch(DataError):
    """Benchmark CSV header is not x_0..x_{K-1},t,y,t_test,cepo_test."""

    def __init__(self, found: list[str], expected: list[str]):
        super().__init__(detail=f"Header mismatch: expected {','.join(expected)}, found {','.join(found)}")


class OracleMissing(DataError):
    """Evaluation requested without ground truth."""

    def __init__(self, detail: str = "MISE/DPE require cepo ground truth (a scenario oracle or a DGP spec)"):
        super().__init__(detail=detail)


class ChecksumMismatch(DataError):
    """Stored digest does not match content."""

    def __init__(self, what: str):
        super().__init__(detail=f"Checksum mismatch in {what}")


class UnsupportedVersion(DataError):
    """File written by an unknown format version."""

    def __init__(self, what: str, version: int):
        super().__init__(detail=f"Unsupported {what} format version {version}")


class InsufficientContext(DataError):
    """Too few context rows for the requested operation."""

    def __init__(self, detail: str = "Not enough context rows"):
        super().__init__(detail=detail)


class GridMismatch(DataError):
    """Curves evaluated on different grids."""

    def __init__(self, detail: str = "Prediction and truth grids differ"):
        super().__init__(detail=detail)


class UnknownScenario(UsageError):
    """Scenario id not registered."""

    def __init__(self, scenario_id: str):
        super().__init__(detail=f"Unknown scenario: {scenario_id}")


class TreatmentOutOfRange(DataError):
    """CEPO queried outside the treatment interval."""

    def __init__(self, t: float):
        super().__init__(detail=f"Treatment {t!r} outside [0, 1]")
