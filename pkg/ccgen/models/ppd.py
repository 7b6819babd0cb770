"""Binned outcome axis, histogram distributions and outcome standardization."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class BinGrid:
  """L bins over [lo, hi] in z-space, described by their L+1 edges."""
  edges: np.ndarray

  @classmethod
  def uniform(cls, bin_count: int, lo: float = -10.0, hi: float = 10.0) -> "BinGrid":
    if bin_count < 1 or not lo < hi:
      raise ValueError(f"invalid grid: L={bin_count}, lo={lo}, hi={hi}")
    return cls(edges=np.linspace(lo, hi, bin_count + 1))

  @property
  def bin_count(self) -> int:
    return self.edges.shape[0] - 1

  @property
  def lo(self) -> float:
    return float(self.edges[0])

  @property
  def hi(self) -> float:
    return float(self.edges[-1])

  @property
  def widths(self) -> np.ndarray:
    return np.diff(self.edges)

  @property
  def width(self) -> float:
    return (self.hi - self.lo) / self.bin_count

  @property
  def centers(self) -> np.ndarray:
    return 0.5 * (self.edges[:-1] + self.edges[1:])

  def is_monotone(self) -> bool:
    return bool((np.diff(self.edges) > 0.0).all())

  def is_uniform(self, rtol: float = 1e-9) -> bool:
    return self.is_monotone() and bool(np.allclose(self.widths, self.width, rtol=rtol, atol=0.0))


@dataclass(frozen=True, eq=False)
class HistogramDistribution:
  """Probability mass over the bins of a grid; probs may be (L,) or batched (..., L)."""
  probs: np.ndarray

  def is_valid(self, atol: float = 1e-12) -> bool:
    probs = self.probs
    return bool((probs >= 0.0).all() and np.allclose(probs.sum(axis=-1), 1.0, rtol=0.0, atol=atol))


@dataclass(frozen=True)
class Standardizer:
  """z = (y - mean) / std with population std; degenerate when std < 1e-12."""
  mean: float
  std: float
  degenerate: bool = False
