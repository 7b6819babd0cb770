"""Training the toy model on the prior, gradient verification and ITRC prediction."""

from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import torch

from ccgen.exceptions.prior import NonFiniteLoss
from ccgen.log import get_logger
from ccgen.models.config import LossKind, OptimizerKind, RunConfig
from ccgen.models.evaluation import ContextSet
from ccgen.models.ppd import BinGrid, HistogramDistribution
from ccgen.models.prior import Dataset
from ccgen.operations.dgp_ops import sample_dgp_dataset
from ccgen.operations.ppd_ops import (
    apply_standardizer,
    crps_loss_torch,
    gaussian_bin_mass,
    histogram_loss_torch,
    histogram_mean,
    invert_standardizer,
)
from ccgen.operations.rng_ops import derive_seed, derive_stream
from ccgen.operations.toy_model import TokenBatch, ToyModel, batch_log_probs, make_token_batch

logger = get_logger(__name__)

QUERY_CHUNK = 2048


class StepRecord(NamedTuple):
    step: int
    loss: float
    dgp_index: int
    resamples: int


@dataclass
class Trainer:
    """Single owner of the model parameters and optimizer state."""
    model: ToyModel
    optimizer: torch.optim.Optimizer
    config: RunConfig
    grid: BinGrid


def bin_grid(config: RunConfig) -> BinGrid:
    return BinGrid.uniform(config.bin_count, config.bin_lo, config.bin_hi)


def build_model(config: RunConfig, seed: int) -> ToyModel:
    torch.manual_seed(derive_seed(seed, "init"))
    return ToyModel(config.toy)


def build_optimizer(model: ToyModel, config: RunConfig) -> torch.optim.Optimizer:
    if config.optimizer is OptimizerKind.ADAM:
        return torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    return torch.optim.SGD(model.parameters(), lr=config.learning_rate, momentum=config.momentum)


def build_trainer(config: RunConfig, seed: int) -> Trainer:
    model = build_model(config, seed)
    return Trainer(model=model, optimizer=build_optimizer(model, config), config=config, grid=bin_grid(config))


# --- batches ---------------------------------------------------------------


def training_batch(dataset: Dataset, config: RunConfig, rng: np.random.Generator) -> TokenBatch:
    """Shuffle, keep ``train_rows`` rows, split at M ~ U{N/4..3N/4}.

    Context rows carry factual (x, t, y); query rows carry (x, t') with the
    binned counterfactual CEPO as target.
    """
    n = min(config.train_rows, dataset.n_rows)
    rows = rng.permutation(dataset.n_rows)[:n]
    m = int(rng.integers(max(1, n // 4), max(2, (3 * n) // 4) + 1))
    m = min(m, n - 1)
    ctx, qry = rows[:m], rows[m:]
    batch = make_token_batch(
        dataset.covariates[ctx],
        dataset.t[ctx],
        dataset.y[ctx],
        dataset.covariates[qry],
        dataset.t_cf[qry],
        config.toy.max_features,
    )
    target_z = apply_standardizer(batch.standardizer, dataset.cepo_cf[qry])
    targets = gaussian_bin_mass(target_z, config.target_sigma, bin_grid(config)).probs
    return replace(batch, targets=targets, target_z=target_z)


def batch_loss(model: ToyModel, batch: TokenBatch, config: RunConfig, grid: BinGrid) -> torch.Tensor:
    log_q = batch_log_probs(model, batch)
    dtype = log_q.dtype
    if config.loss is LossKind.CRPS:
        edges = torch.as_tensor(grid.edges, dtype=dtype)
        return crps_loss_torch(log_q.exp(), edges, torch.as_tensor(batch.target_z, dtype=dtype))
    return histogram_loss_torch(log_q, torch.as_tensor(batch.targets, dtype=dtype))


def train_step(trainer: Trainer, batch: TokenBatch) -> float:
    """One clipped gradient update on one batch. Raises NonFiniteLoss before updating."""
    trainer.model.train()
    trainer.optimizer.zero_grad()
    loss = batch_loss(trainer.model, batch, trainer.config, trainer.grid)
    if not torch.isfinite(loss):
        raise NonFiniteLoss()
    loss.backward()
    torch.nn.utils.clip_grad_norm_(trainer.model.parameters(), trainer.config.grad_clip)
    trainer.optimizer.step()
    return float(loss.detach())


def train_prior_model(
    config: RunConfig,
    steps: int,
    seed: int | None = None,
    trainer: Trainer | None = None,
    on_step: Callable[[StepRecord], None] | None = None,
) -> tuple[Trainer, list[StepRecord]]:
    """A fresh prior DGP per step; a non-finite loss redraws the DGP within the retry budget."""
    seed = config.seed if seed is None else seed
    trainer = trainer or build_trainer(config, seed)
    records = []
    for step in range(steps):
        for resample in range(config.max_retries + 1):
            index = step * (config.max_retries + 1) + resample
            _, dataset = sample_dgp_dataset(config, derive_seed(seed, "train/dgp"), index)
            batch = training_batch(dataset, config, derive_stream(seed, "train/batch", index))
            try:
                loss = train_step(trainer, batch)
            except NonFiniteLoss:
                logger.warning("Non-finite loss at step %d (DGP %d), resampling", step, index)
                continue
            break
        else:
            raise NonFiniteLoss(f"Non-finite loss at step {step} after {config.max_retries + 1} DGPs")
        record = StepRecord(step, loss, index, resample)
        records.append(record)
        if on_step is not None:
            on_step(record)
        if step % config.log_every == 0 or step == steps - 1:
            logger.info("step %d loss %.6f", step, loss)
    return trainer, records


def overfit_batch(trainer: Trainer, batch: TokenBatch, steps: int) -> list[float]:
    """Repeated updates on one frozen batch."""
    return [train_step(trainer, batch) for _ in range(steps)]


# --- gradient verification -------------------------------------------------


class GradCheckResult(NamedTuple):
    max_rel_error: float
    analytic: np.ndarray
    numeric: np.ndarray


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-4) -> np.ndarray:
    """|a - n| / max(|a|, |n|, floor)."""
    return np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)


def _coordinates(model: ToyModel, count: int, rng: np.random.Generator) -> list[tuple[torch.Tensor, int]]:
    params = [p for p in model.parameters() if p.requires_grad]
    sizes = np.array([p.numel() for p in params])
    flat = rng.choice(int(sizes.sum()), size=min(count, int(sizes.sum())), replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    coords = []
    for f in np.sort(flat):
        which = int(np.searchsorted(offsets, f, side="right") - 1)
        coords.append((params[which], int(f - offsets[which])))
    return coords


def finite_difference(
    model: ToyModel, batch: TokenBatch, config: RunConfig, param: torch.Tensor, offset: int, epsilon: float
) -> float:
    grid = bin_grid(config)
    flat = param.data.view(-1)
    original = flat[offset].item()
    with torch.no_grad():
        flat[offset] = original + epsilon
        plus = batch_loss(model, batch, config, grid).item()
        flat[offset] = original - epsilon
        minus = batch_loss(model, batch, config, grid).item()
        flat[offset] = original
    return (plus - minus) / (2.0 * epsilon)


def analytic_gradient(model: ToyModel, batch: TokenBatch, config: RunConfig) -> None:
    model.zero_grad()
    batch_loss(model, batch, config, bin_grid(config)).backward()


def gradient_check(
    model: ToyModel,
    batch: TokenBatch,
    config: RunConfig,
    epsilon: float = 1e-5,
    coordinates: int = 64,
    seed: int = 0,
) -> GradCheckResult:
    """Compare autograd against central differences on random parameter coordinates.

    The model is converted to float64 in place.
    """
    model = model.double()
    model.train()
    analytic_gradient(model, batch, config)
    coords = _coordinates(model, coordinates, derive_stream(seed, "gradcheck"))
    analytic = np.array([param.grad.view(-1)[offset].item() for param, offset in coords])
    numeric = np.array([finite_difference(model, batch, config, param, offset, epsilon) for param, offset in coords])
    errors = relative_error(analytic, numeric)
    return GradCheckResult(float(errors.max()), analytic, numeric)


def self_target_batch(model: ToyModel, batch: TokenBatch) -> TokenBatch:
    """The batch with targets replaced by the model's own detached output."""
    with torch.no_grad():
        probs = batch_log_probs(model, batch).exp().cpu().numpy().astype(np.float64)
    return replace(batch, targets=probs)


# --- inference -------------------------------------------------------------


def predict_curves(
    model: ToyModel, config: RunConfig, context: ContextSet, x: np.ndarray, t_grid: np.ndarray
) -> np.ndarray:
    """Mean of the CEPO-PPD for every (x_i, t_g), mapped back through the context standardizer."""
    t_grid = np.asarray(t_grid, dtype=float)
    q, g = x.shape[0], t_grid.shape[0]
    batch = make_token_batch(
        context.covariates, context.t, context.y, np.repeat(x, g, axis=0), np.tile(t_grid, q), config.toy.max_features
    )
    grid = bin_grid(config)
    model.eval()
    means = []
    with torch.no_grad():
        for start in range(0, q * g, QUERY_CHUNK):
            log_q = batch_log_probs(model, batch, slice(start, start + QUERY_CHUNK))
            probs = log_q.exp().double().cpu().numpy()
            means.append(histogram_mean(HistogramDistribution(probs=probs), grid))
    z = np.concatenate(means)
    return invert_standardizer(batch.standardizer, z).reshape(q, g)


def predict_itrc(
    model: ToyModel, config: RunConfig, context: ContextSet, x: np.ndarray, t_grid: np.ndarray
) -> np.ndarray:
    """t -> mu_t(x) for one covariate vector in a single forward pass."""
    return predict_curves(model, config, context, np.atleast_2d(x), t_grid)[0]
