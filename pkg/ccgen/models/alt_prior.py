"""Structures of the Bernstein-polynomial and value-based priors."""

from dataclasses import dataclass

import numpy as np

from ccgen.models.prior import PriorHyperparams, RandomMlp


@dataclass(frozen=True, eq=False)
class SigmoidNormalTreatment:
  """Per-row conditional parameters of t | x ~ logistic(N(mean, (overlap * std)^2))."""
  cond_mean: np.ndarray
  cond_std: np.ndarray
  overlap: float

  @property
  def effective_std(self) -> np.ndarray:
    return self.overlap * self.cond_std


@dataclass(frozen=True, eq=False)
class BernsteinDgp:
  hyperparams: PriorHyperparams
  degree: int
  global_coeffs: np.ndarray  # c0, shape (degree+1,)
  coeff_mlp: RandomMlp  # x -> c(x)
  treatment_mlp: RandomMlp  # x -> (mean, raw std)
  heterogeneity: float  # lambda
  overlap: float  # alpha
  covariates: np.ndarray  # standardized, (N, K)
  coeffs: np.ndarray  # mixed coefficients per row, (N, degree+1)
  noise: np.ndarray  # centred, scaled outcome noise column, (N,)
  seed: int
  index: int = 0
  retries: int = 0


@dataclass(frozen=True, eq=False)
class ValueBasedDgp:
  hyperparams: PriorHyperparams
  support_points: np.ndarray  # sorted, strictly increasing, (n,)
  cepo_columns: np.ndarray  # (N, n)
  noise_columns: np.ndarray  # (N, n)
  noise_fraction: float
  treatment_mlp: RandomMlp
  overlap: float
  covariates: np.ndarray  # standardized, (N, K)
  seed: int
  index: int = 0
  retries: int = 0
