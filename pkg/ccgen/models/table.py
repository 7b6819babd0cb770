"""Benchmark table in the x_0..x_{K-1},t,y,t_test,cepo_test column format."""

from dataclasses import dataclass

import numpy as np

ORACLE_COLUMNS = ("t", "y", "t_test", "cepo_test")


def benchmark_header(k: int) -> list[str]:
  return [f"x_{i}" for i in range(k)] + list(ORACLE_COLUMNS)


@dataclass(frozen=True, eq=False)
class BenchmarkTable:
  covariates: np.ndarray  # (N, K)
  t: np.ndarray
  y: np.ndarray
  t_test: np.ndarray
  cepo_test: np.ndarray

  def __post_init__(self) -> None:
    n = self.covariates.shape[0]
    for name in ORACLE_COLUMNS:
      if getattr(self, name).shape != (n,):
        raise ValueError(f"column {name} has shape {getattr(self, name).shape}, expected ({n},)")

  @property
  def n_rows(self) -> int:
    return self.covariates.shape[0]

  @property
  def n_covariates(self) -> int:
    return self.covariates.shape[1]

  @property
  def header(self) -> list[str]:
    return benchmark_header(self.n_covariates)

  def matrix(self) -> np.ndarray:
    return np.column_stack([self.covariates, self.t, self.y, self.t_test, self.cepo_test])

  def is_finite(self) -> bool:
    return bool(np.isfinite(self.matrix()).all())
