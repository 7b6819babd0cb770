"""Evaluation records: context sets, ground-truth sources and reports."""

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any, Optional, Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict

from ccgen.models.scenario import OptimumMode


@dataclass(frozen=True, eq=False)
class ContextSet:
  """Factual (x, t, y) triples shown to a predictor; never counterfactual columns."""
  covariates: np.ndarray
  t: np.ndarray
  y: np.ndarray

  @property
  def size(self) -> int:
    return self.covariates.shape[0]


@dataclass(frozen=True, eq=False)
class EvalSource:
  """Factual data plus a ground-truth oracle t_grid -> (N, G) CEPO surface."""
  name: str
  covariates: np.ndarray
  t: np.ndarray
  y: np.ndarray
  surface: Callable[[np.ndarray], np.ndarray]
  optimum_mode: OptimumMode = OptimumMode.MIN

  @property
  def n_rows(self) -> int:
    return self.covariates.shape[0]

  def context(self, rows: np.ndarray) -> ContextSet:
    return ContextSet(covariates=self.covariates[rows], t=self.t[rows], y=self.y[rows])


class CurvePredictor(Protocol):
  name: str

  def predict(self, context: ContextSet, x: np.ndarray, grid: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Predicted CEPO curves for the query covariates, shape (len(x), len(grid))."""
    ...


@dataclass(frozen=True, eq=False)
class DpeComputation:
  mesh: np.ndarray
  mode: OptimumMode
  t_star: np.ndarray
  t_hat_star: np.ndarray
  value: float


class EvalReport(BaseModel):
  """Per-fold MISE/DPE with population mean and std across folds."""
  model_config = ConfigDict(frozen=True)

  predictor: str
  source: str
  folds: int
  seed: int
  grid_points: int
  per_fold_mise: list[float]
  per_fold_dpe: Optional[list[float]] = None
  mise_mean: float
  mise_std: float
  dpe_mean: Optional[float] = None
  dpe_std: Optional[float] = None
  dpe_skipped: bool = False
  config: dict[str, Any] = {}


class ComparisonRow(BaseModel):
  """Held-out MISE of the toy model and both baselines on one fresh prior DGP."""
  seed: int
  toy_mise: float
  context_mean_mise: float
  knn_mise: float

  @property
  def beats_context_mean(self) -> bool:
    return self.toy_mise < self.context_mean_mise

  @property
  def beats_knn(self) -> bool:
    return self.toy_mise < self.knn_mise
