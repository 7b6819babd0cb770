"""Outcome standardization, Gaussian bin targets, histogram and CRPS losses.

Losses are implemented twice: in numpy for evaluation and oracles, and in
torch for training, where they must stay differentiable.
"""

import numpy as np
import torch
from scipy.stats import norm

from ccgen.exceptions.data import InsufficientContext
from ccgen.models.ppd import BinGrid, HistogramDistribution, Standardizer

LOG_FLOOR = 1e-12
DEGENERATE_STD = 1e-12


# --- standardization -------------------------------------------------------


def fit_standardizer(context_y: np.ndarray) -> Standardizer:
    """Mean and population std of the context outcomes."""
    context_y = np.asarray(context_y, dtype=float)
    if context_y.shape[0] < 2:
        raise InsufficientContext("Standardizer needs at least two context outcomes")
    mean = float(context_y.mean())
    std = float(context_y.std())
    if std < DEGENERATE_STD:
        return Standardizer(mean=mean, std=std, degenerate=True)
    return Standardizer(mean=mean, std=std)


def apply_standardizer(standardizer: Standardizer, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if standardizer.degenerate:
        return np.zeros_like(y)
    return (y - standardizer.mean) / standardizer.std


def invert_standardizer(standardizer: Standardizer, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if standardizer.degenerate:
        return np.full_like(z, standardizer.mean)
    return z * standardizer.std + standardizer.mean


# --- histogram distributions ----------------------------------------------


def gaussian_bin_mass(mu: np.ndarray | float, sigma: float, grid: BinGrid) -> HistogramDistribution:
    """N(mu, sigma^2) mass per bin; tails beyond the grid go to the edge bins.

    ``mu`` may be a scalar or a vector, giving probs of shape (L,) or (n, L).
    """
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    mu = np.asarray(mu, dtype=float)
    cdf = norm.cdf((grid.edges - mu[..., None]) / sigma)
    cdf[..., 0] = 0.0
    cdf[..., -1] = 1.0
    return HistogramDistribution(probs=np.diff(cdf, axis=-1))


def histogram_loss(q: HistogramDistribution, target: HistogramDistribution) -> np.ndarray | float:
    """Cross-entropy -sum_l target[l] log max(q[l], 1e-12)."""
    loss = -(target.probs * np.log(np.maximum(q.probs, LOG_FLOOR))).sum(axis=-1)
    return float(loss) if np.ndim(loss) == 0 else loss


def histogram_mean(q: HistogramDistribution, grid: BinGrid) -> np.ndarray | float:
    mean = q.probs @ grid.centers
    return float(mean) if np.ndim(mean) == 0 else mean


def crps_loss(q: HistogramDistribution, grid: BinGrid, y_true: np.ndarray | float) -> np.ndarray | float:
    """Discrete CRPS: sum_l (F_q(e_{l+1}) - 1{y <= e_{l+1}})^2 * width_l."""
    y_true = np.asarray(y_true, dtype=float)
    cdf = np.cumsum(q.probs, axis=-1)
    step = (y_true[..., None] <= grid.edges[1:]).astype(float)
    crps = ((cdf - step) ** 2 * grid.widths).sum(axis=-1)
    return float(crps) if np.ndim(crps) == 0 else crps


# --- torch counterparts ----------------------------------------------------


def histogram_loss_torch(log_q: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean cross-entropy over rows from log-probabilities (already normalized)."""
    return -(target * log_q.clamp_min(np.log(LOG_FLOOR))).sum(dim=-1).mean()


def crps_loss_torch(q: torch.Tensor, edges: torch.Tensor, y_true: torch.Tensor) -> torch.Tensor:
    cdf = torch.cumsum(q, dim=-1)
    step = (y_true[:, None] <= edges[1:]).to(q.dtype)
    return (((cdf - step) ** 2) * torch.diff(edges)).sum(dim=-1).mean()
