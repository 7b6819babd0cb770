"""Scenario definitions for (semi-)synthetic benchmarks."""

from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel

from ccgen.models.table import BenchmarkTable

BUILTIN_GAUSSIAN = "builtin:gaussian"


class OptimumMode(str, Enum):
  MIN = "min"
  MAX = "max"
  MONOTONE = "monotone"


# (standardized X, rng) -> raw treatment score; realize_scenario min-max scales it
TreatmentFn = Callable[[np.ndarray, np.random.Generator], np.ndarray]
# (standardized X, t) -> mu_t(x), vectorized over rows
DoseResponseFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
# K -> covariate indices read by a function
FeatureSet = Callable[[int], tuple[int, ...]]


@dataclass(frozen=True)
class Scenario:
  name: str
  covariate_source: str
  treatment_fn: TreatmentFn
  dose_response_fn: DoseResponseFn
  treatment_features: FeatureSet
  outcome_features: FeatureSet
  outcome_noise_std: float = 0.1
  optimum_mode: OptimumMode = OptimumMode.MIN
  n_rows: int = 512
  n_covariates: int = 6

  @property
  def dpe_skipped(self) -> bool:
    return self.optimum_mode is OptimumMode.MONOTONE


@dataclass(frozen=True, eq=False)
class RealizedScenario:
  """A scenario bound to its covariates, standardization and realized table."""
  scenario: Scenario
  seed: int
  x_mean: np.ndarray
  x_std: np.ndarray
  table: BenchmarkTable

  @property
  def features(self) -> np.ndarray:
    return (self.table.covariates - self.x_mean) / self.x_std


class ScenarioMetadata(BaseModel):
  """Sidecar written next to a realized scenario CSV."""
  name: str
  seed: int
  covariate_source: str
  optimum_mode: OptimumMode
  dpe_skipped: bool
  n_rows: int
  n_covariates: int
  outcome_noise_std: float
