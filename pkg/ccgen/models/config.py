"""Run configuration models."""

from enum import Enum
from pathlib import Path
from typing import Any

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ccgen.exceptions.base import ConfigError


class PriorKind(str, Enum):
  THREE_MLP = "three_mlp"
  BERNSTEIN = "bernstein"
  VALUE_BASED = "value_based"
  ONE_MLP = "one_mlp"


class CorruptionMode(str, Enum):
  IN_PASS = "in_pass"
  POST_HOC_ONLY = "post_hoc_only"


class Toggle(str, Enum):
  ON = "on"
  OFF = "off"


class LossKind(str, Enum):
  HISTOGRAM = "histogram"
  CRPS = "crps"


class OptimizerKind(str, Enum):
  SGD = "sgd"
  ADAM = "adam"


class ToyModelConfig(BaseModel):
  """Tri-encoder transformer sizes."""
  model_config = ConfigDict(extra="forbid", frozen=True)

  layer_count: int = Field(2, ge=1)
  head_count: int = Field(4, ge=1)
  embed_dim: int = Field(64, ge=1)
  ff_dim: int = Field(128, ge=1)
  bin_count: int = Field(64, ge=2)
  max_features: int = Field(100, ge=1)
  t_encoder_hidden: int = Field(64, ge=1)

  @model_validator(mode="after")
  def _heads_divide_embedding(self) -> "ToyModelConfig":
    if self.embed_dim % self.head_count:
      raise ValueError(f"embed_dim {self.embed_dim} not divisible by head_count {self.head_count}")
    return self


FULL_SCALE_TOY = ToyModelConfig(
  layer_count=20, head_count=6, embed_dim=384, ff_dim=768,
  bin_count=1024, max_features=100, t_encoder_hidden=384,
)


class RunConfig(BaseModel):
  """Every knob of a run. Flags override file values override defaults."""
  model_config = ConfigDict(extra="forbid", frozen=True, use_enum_values=False)

  # prior
  prior: PriorKind = PriorKind.THREE_MLP
  corruption_mode: CorruptionMode = CorruptionMode.IN_PASS
  positivity: Toggle = Toggle.ON
  seed: int = Field(0, ge=0)
  n_samples: int = Field(2048, ge=8)
  max_covariates: int = Field(98, ge=2, le=98)
  counterfactuals_per_row: int = Field(1, ge=1)
  positivity_floor: float = Field(0.05, gt=0.0)
  outcome_noise_multiplier: float = Field(1.0, ge=0.0)
  max_retries: int = Field(16, ge=1)

  # histogram grid, z-space
  loss: LossKind = LossKind.HISTOGRAM
  bin_lo: float = -10.0
  bin_hi: float = 10.0
  target_sigma: float = Field(0.01, gt=0.0)

  # evaluation
  grid_points: int = Field(65, ge=2)
  folds: int = Field(5, ge=2)
  knn_neighbors: int = Field(10, ge=1)

  # toy model and optimizer
  toy: ToyModelConfig = ToyModelConfig()
  train_rows: int = Field(256, ge=8)
  optimizer: OptimizerKind = OptimizerKind.SGD
  learning_rate: float = Field(1e-3, gt=0.0)
  momentum: float = Field(0.9, ge=0.0, lt=1.0)
  grad_clip: float = Field(1.0, gt=0.0)
  log_every: int = Field(50, ge=1)

  @model_validator(mode="after")
  def _grid_is_ordered(self) -> "RunConfig":
    if not self.bin_lo < self.bin_hi:
      raise ValueError("bin_lo must be below bin_hi")
    return self

  @property
  def bin_count(self) -> int:
    return self.toy.bin_count

  @property
  def positivity_on(self) -> bool:
    return self.positivity is Toggle.ON

  def with_overrides(self, **overrides: Any) -> "RunConfig":
    """Return a copy with non-None overrides applied and validated."""
    data = self.model_dump()
    data.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(data)

  @classmethod
  def preset(cls, name: str) -> "RunConfig":
    if name == "desk":
      return cls()
    if name == "full":
      return cls(toy=FULL_SCALE_TOY, train_rows=2048)
    raise ConfigError(f"Unknown preset: {name}")


_TOY_KEYS = set(ToyModelConfig.model_fields)


def build_config(data: dict[str, Any]) -> RunConfig:
  """Validate a flat or nested mapping into a RunConfig, rejecting unknown keys."""
  flat = dict(data)
  toy = dict(flat.pop("toy", None) or {})
  # flat files may carry toy keys at top level, e.g. embed_dim=32
  for key in list(flat):
    if key in _TOY_KEYS:
      toy[key] = flat.pop(key)
  if toy:
    flat["toy"] = toy
  try:
    return RunConfig.model_validate(flat)
  except ValidationError as exc:
    raise ConfigError(f"Invalid configuration: {exc}") from exc


def load_config(path: str | Path | None = None, **overrides: Any) -> RunConfig:
  """Read a flat key=value file (optional) and apply flag overrides."""
  data: dict[str, Any] = {}
  if path is not None:
    path = Path(path)
    if not path.is_file():
      raise ConfigError(f"Config file not found: {path}")
    data.update({k.strip().lower(): v for k, v in dotenv_values(path).items() if v is not None})
  data.update({k: v for k, v in overrides.items() if v is not None})
  return build_config(data)
