"""Prior structures: hyperparameters, random MLPs, sampled DGPs and datasets."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

Node = tuple[int, int]  # (layer, index); layer 0 is the input layer


class PriorHyperparams(BaseModel):
  """Structural hyperparameters of one 3-MLP draw."""
  model_config = ConfigDict(frozen=True)

  n_samples: int = Field(2048, ge=1)
  n_covariates: int = Field(ge=1, le=98)
  layers_x: int = Field(ge=3)
  layers_t: int = Field(ge=3)
  layers_y: int = Field(ge=3)
  hidden_x: int = Field(ge=4)
  hidden_t: int = Field(ge=4)
  hidden_y: int = Field(ge=4)
  density_x: float = Field(ge=0.1, le=1.0)
  density_t: float = Field(ge=0.1, le=1.0)
  density_y: float = Field(ge=0.1, le=1.0)
  confounding: float = Field(ge=0.0, le=1.0)
  noise_scale: float = Field(gt=0.0)
  # K as drawn before clamping to the available covariate nodes
  requested_covariates: Optional[int] = None


class CovariateSplit(BaseModel):
  """Partition of covariate indices into confounders, treatment-only and outcome-only."""
  model_config = ConfigDict(frozen=True)

  conf_indices: tuple[int, ...]
  t_only_indices: tuple[int, ...]
  y_only_indices: tuple[int, ...]

  @model_validator(mode="after")
  def _disjoint(self) -> "CovariateSplit":
    seen = set(self.conf_indices) | set(self.t_only_indices) | set(self.y_only_indices)
    total = len(self.conf_indices) + len(self.t_only_indices) + len(self.y_only_indices)
    if len(seen) != total:
      raise ValueError("covariate role sets overlap")
    return self

  @property
  def size(self) -> int:
    return len(self.conf_indices) + len(self.t_only_indices) + len(self.y_only_indices)

  @property
  def treatment_inputs(self) -> list[int]:
    return sorted(self.conf_indices + self.t_only_indices)

  @property
  def outcome_inputs(self) -> list[int]:
    return sorted(self.conf_indices + self.y_only_indices)


class CorruptionKind(str, Enum):
  NONE = "none"
  BINARIZE = "binarize"
  QUANTIZE = "quantize"
  ZERO_INFLATE = "zero_inflate"


class CorruptionPhase(str, Enum):
  NONE = "none"
  IN_PASS = "in_pass"
  POST_HOC = "post_hoc"


class CovariateNode(BaseModel):
  """One selected covariate node and how it is corrupted."""
  model_config = ConfigDict(frozen=True)

  layer: int = Field(ge=1)
  index: int = Field(ge=0)
  kind: CorruptionKind = CorruptionKind.NONE
  phase: CorruptionPhase = CorruptionPhase.NONE
  levels: int = Field(2, ge=2)
  rate: float = Field(0.0, ge=0.0, le=1.0)
  quantile: float = Field(0.5, ge=0.0, le=1.0)


@dataclass(frozen=True, eq=False)
class RandomMlp:
  """Sparse random MLP. weights[l-1] maps layer l-1 to layer l; masked entries are zero."""
  weights: tuple[np.ndarray, ...]
  masks: tuple[np.ndarray, ...]
  activations: tuple[np.ndarray, ...]
  sigma_w: float
  protected_edges: frozenset[tuple[int, int, int]]  # (layer, out, in)

  @property
  def layer_count(self) -> int:
    return len(self.weights)

  @property
  def widths(self) -> tuple[int, ...]:
    return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

  def nodes(self, first_layer: int = 1, last_layer: int | None = None) -> list[Node]:
    last = self.layer_count if last_layer is None else last_layer
    widths = self.widths
    return [(layer, i) for layer in range(first_layer, last + 1) for i in range(widths[layer])]

  def hidden_nodes(self) -> list[Node]:
    """Nodes strictly between the input and the output layer."""
    return self.nodes(1, self.layer_count - 1)


@dataclass(frozen=True, eq=False)
class Dataset:
  """Factual tuples plus counterfactual (t', mu_t'(x)) per row."""
  covariates: np.ndarray
  t: np.ndarray
  y: np.ndarray
  t_cf: np.ndarray
  cepo_cf: np.ndarray
  # further counterfactual draws, shape (N, C-1)
  extra_t_cf: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
  extra_cepo_cf: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
  standardization: Optional[dict[str, tuple[float, float]]] = None

  @property
  def n_rows(self) -> int:
    return self.covariates.shape[0]

  @property
  def n_covariates(self) -> int:
    return self.covariates.shape[1]

  def arrays(self) -> tuple[np.ndarray, ...]:
    return (self.covariates, self.t, self.y, self.t_cf, self.cepo_cf, self.extra_t_cf, self.extra_cepo_cf)

  def is_finite(self) -> bool:
    return all(bool(np.isfinite(a).all()) for a in self.arrays())

  def subset(self, rows: np.ndarray) -> "Dataset":
    extra = self.extra_t_cf.shape[1] > 0
    return Dataset(
      covariates=self.covariates[rows],
      t=self.t[rows],
      y=self.y[rows],
      t_cf=self.t_cf[rows],
      cepo_cf=self.cepo_cf[rows],
      extra_t_cf=self.extra_t_cf[rows] if extra else self.extra_t_cf,
      extra_cepo_cf=self.extra_cepo_cf[rows] if extra else self.extra_cepo_cf,
      standardization=self.standardization,
    )


@dataclass(frozen=True, eq=False)
class Dgp:
  """A sampled 3-MLP structural causal model and the state needed to answer CEPO queries."""
  hyperparams: PriorHyperparams
  mlp_x: RandomMlp
  mlp_t: RandomMlp
  mlp_y: RandomMlp
  split: CovariateSplit
  eta_t_node: Node
  eta_y_node: Node
  corruption_plan: tuple[CovariateNode, ...]
  seed: int
  x_mean: np.ndarray
  x_std: np.ndarray
  outcome_inputs: np.ndarray  # z-scored covariate columns read by mlp_y
  outcome_noise: tuple[np.ndarray, ...]  # per-row exogenous noise of mlp_y hidden layers
  positivity: bool = True
  positivity_floor: float = 0.05
  outcome_noise_multiplier: float = 1.0
  t_minmax: tuple[float, float] = (0.0, 1.0)
  sigma_t_tilde: float = 0.0
  sigma_mu: float = 0.0
  eta_y_std: float = 1.0
  index: int = 0
  retries: int = 0


@dataclass(frozen=True, eq=False)
class OneMlpDgp:
  """Single-MLP ablation: covariates, treatment and outcome are nodes of one network."""
  hyperparams: PriorHyperparams
  mlp: RandomMlp
  covariate_nodes: tuple[CovariateNode, ...]
  treatment_node: Node
  eta_t_node: Node
  eta_y_node: Node
  outcome_node: Node
  seed: int
  treatment_layer_state: np.ndarray  # z^(l_T) per row, before the treatment is set
  downstream_noise: tuple[np.ndarray, ...]  # noise of layers l_T+1..L
  positivity: bool = True
  positivity_floor: float = 0.05
  outcome_noise_multiplier: float = 1.0
  t_minmax: tuple[float, float] = (0.0, 1.0)
  sigma_t_tilde: float = 0.0
  sigma_mu: float = 0.0
  eta_y_std: float = 1.0
  index: int = 0
  retries: int = 0
