"""Prior dispatch: sample any configured DGP kind with rejection, and query its oracle."""

import hashlib
from collections.abc import Callable
from functools import singledispatch
from typing import Any

import numpy as np

from ccgen.exceptions.prior import DegenerateDgp, PriorExhausted
from ccgen.log import get_logger
from ccgen.models.alt_prior import BernsteinDgp, ValueBasedDgp
from ccgen.models.config import PriorKind, RunConfig
from ccgen.models.prior import Dataset, Dgp, OneMlpDgp
from ccgen.operations.alt_prior_ops import (
    cepo_surface_bernstein,
    cepo_surface_value_based,
    sample_bernstein,
    sample_value_based,
)
from ccgen.operations.prior_ops import (
    cepo_surface_one_mlp,
    cepo_surface_three_mlp,
    sample_one_mlp,
    sample_three_mlp,
)

logger = get_logger(__name__)

Sampler = Callable[[RunConfig, int, int, int], tuple[Any, Dataset]]

SAMPLERS: dict[PriorKind, Sampler] = {
    PriorKind.THREE_MLP: sample_three_mlp,
    PriorKind.ONE_MLP: sample_one_mlp,
    PriorKind.BERNSTEIN: sample_bernstein,
    PriorKind.VALUE_BASED: sample_value_based,
}


def sample_dgp_dataset(config: RunConfig, seed: int, index: int = 0) -> tuple[Any, Dataset]:
    """Draw one DGP of ``config.prior`` and its dataset.

    Degenerate draws are rejected and redrawn from the next attempt's streams,
    up to ``config.max_retries`` resamples.

    Raises:
        PriorExhausted: every attempt was degenerate.
    """
    sampler = SAMPLERS[config.prior]
    last_reason = ""
    for attempt in range(config.max_retries + 1):
        try:
            dgp, dataset = sampler(config, seed, index, attempt)
        except DegenerateDgp as exc:
            last_reason = exc.detail
            logger.info("Rejected %s DGP (index %d, attempt %d): %s", config.prior.value, index, attempt, exc.detail)
            continue
        if attempt:
            logger.debug("DGP index %d accepted after %d resamples", index, attempt)
        return dgp, dataset
    raise PriorExhausted(config.max_retries + 1, last_reason)


@singledispatch
def cepo_surface(dgp: Any, t_grid: np.ndarray) -> np.ndarray:
    """Ground-truth mu_t(x_n) for every row n and grid point t, shape (N, G)."""
    raise TypeError(f"No CEPO oracle for {type(dgp).__name__}")


@cepo_surface.register
def _(dgp: Dgp, t_grid: np.ndarray) -> np.ndarray:
    return cepo_surface_three_mlp(dgp, np.asarray(t_grid, dtype=float))


@cepo_surface.register
def _(dgp: OneMlpDgp, t_grid: np.ndarray) -> np.ndarray:
    return cepo_surface_one_mlp(dgp, np.asarray(t_grid, dtype=float))


@cepo_surface.register
def _(dgp: BernsteinDgp, t_grid: np.ndarray) -> np.ndarray:
    return cepo_surface_bernstein(dgp, np.asarray(t_grid, dtype=float))


@cepo_surface.register
def _(dgp: ValueBasedDgp, t_grid: np.ndarray) -> np.ndarray:
    return cepo_surface_value_based(dgp, np.asarray(t_grid, dtype=float))


def dataset_digest(dataset: Dataset) -> str:
    """SHA-256 over shapes and little-endian float64 bytes of every dataset array."""
    digest = hashlib.sha256()
    for array in dataset.arrays():
        values = np.ascontiguousarray(array, dtype="<f8")
        digest.update(repr(values.shape).encode("ascii"))
        digest.update(values.tobytes())
    return digest.hexdigest()


def summarize(dgp: Any, dataset: Dataset) -> dict[str, Any]:
    """N, K, rho and the resample count of one draw, for command summaries."""
    hp = dgp.hyperparams
    return {
        "index": dgp.index,
        "n": dataset.n_rows,
        "k": dataset.n_covariates,
        "rho": round(hp.confounding, 6),
        "retries": dgp.retries,
    }
