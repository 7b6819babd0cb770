"""Benchmark CSV reading and writing, and covariate ingestion."""

from pathlib import Path

import numpy as np
import pandas as pd

from ccgen.exceptions.data import EmptyTable, HeaderMismatch, ParseError
from ccgen.log import get_logger
from ccgen.models.prior import Dataset
from ccgen.models.table import BenchmarkTable, benchmark_header

logger = get_logger(__name__)

FLOAT_FORMAT = "%.17g"


def table_from_dataset(dataset: Dataset) -> BenchmarkTable:
    """Factual columns plus the first counterfactual pair as t_test / cepo_test."""
    return BenchmarkTable(
        covariates=np.asarray(dataset.covariates),
        t=np.asarray(dataset.t),
        y=np.asarray(dataset.y),
        t_test=np.asarray(dataset.t_cf),
        cepo_test=np.asarray(dataset.cepo_cf),
    )


def write_benchmark_csv(table: BenchmarkTable, path: str | Path) -> Path:
    """UTF-8, comma separated, one header row, 17 significant digits per value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(table.matrix(), columns=table.header)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    logger.debug("Wrote %d rows to %s", table.n_rows, path)
    return path


def _numeric(frame: pd.DataFrame, source: str) -> np.ndarray:
    for column in frame.columns:
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = values.isna() & frame[column].notna()
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ParseError(f"Non-numeric cell {frame[column].iloc[row]!r} in {source}", row=row + 1, column=column)
        frame[column] = values
    return frame.to_numpy(dtype=float)


def read_benchmark_csv(path: str | Path) -> BenchmarkTable:
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=[""], encoding="utf-8")
    found = [str(c) for c in frame.columns]
    k = len(found) - 4
    expected = benchmark_header(max(k, 0))
    if k < 1 or found != expected:
        raise HeaderMismatch(found, expected if k >= 1 else benchmark_header(1))
    if frame.empty:
        raise EmptyTable(str(path))
    values = _numeric(frame, str(path))
    if not np.isfinite(values).all():
        row, col = np.argwhere(~np.isfinite(values))[0]
        raise ParseError(f"Non-finite value in {path}", row=int(row) + 1, column=found[col])
    return BenchmarkTable(
        covariates=values[:, :k],
        t=values[:, k],
        y=values[:, k + 1],
        t_test=values[:, k + 2],
        cepo_test=values[:, k + 3],
    )


def load_covariates(source: str | Path) -> np.ndarray:
    """Read a covariate CSV into a finite N x K matrix.

    Text columns are coded as integers in order of first occurrence; a column
    mixing numbers and text is rejected. Rows with missing values are dropped.
    """
    path = Path(source)
    if not path.is_file():
        raise FileNotFoundError(f"Covariate file not found: {path}")
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=["", "NA", "NaN", "nan"], encoding="utf-8")
    if frame.shape[1] == 0:
        raise EmptyTable(str(path))

    complete = frame.notna().all(axis=1)
    dropped = int((~complete).sum())
    if dropped:
        logger.info("Dropped %d rows with missing values from %s", dropped, path)
    frame = frame[complete].reset_index(drop=True)
    if frame.empty:
        raise EmptyTable(str(path))

    columns = []
    for column in frame.columns:
        raw = frame[column]
        values = pd.to_numeric(raw, errors="coerce")
        if values.notna().all():
            columns.append(values.to_numpy(dtype=float))
            continue
        if values.notna().any():
            row = int(np.flatnonzero(values.isna().to_numpy())[0])
            raise ParseError(f"Non-numeric cell {raw.iloc[row]!r} in numeric column", row=row + 1, column=str(column))
        codes, _ = pd.factorize(raw, sort=False)
        columns.append(codes.astype(float))

    matrix = np.column_stack(columns)
    finite = np.isfinite(matrix).all(axis=1)
    if not finite.all():
        logger.info("Dropped %d rows with non-finite values from %s", int((~finite).sum()), path)
        matrix = matrix[finite]
    if matrix.shape[0] == 0:
        raise EmptyTable(str(path))
    return matrix
