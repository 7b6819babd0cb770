"""Fast invariant suite run by ``ccgen selfcheck``."""

import time
from collections.abc import Callable
from dataclasses import replace
from typing import NamedTuple

import numpy as np
from scipy.special import erf

from ccgen.log import get_logger
from ccgen.models.config import RunConfig, ToyModelConfig
from ccgen.models.ppd import BinGrid, HistogramDistribution
from ccgen.models.scenario import OptimumMode
from ccgen.operations.alt_prior_ops import bernstein_basis
from ccgen.operations.dgp_ops import sample_dgp_dataset
from ccgen.operations.eval_ops import dpe, kfold_split, mise, treatment_grid
from ccgen.operations.ppd_ops import crps_loss, gaussian_bin_mass, histogram_loss
from ccgen.operations.prior_ops import query_cepo, treatment_edges_protected
from ccgen.operations.rng_ops import derive_stream
from ccgen.operations.toy_model import make_token_batch
from ccgen.operations.train_ops import build_model, gradient_check

logger = get_logger(__name__)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float


TINY_TOY = ToyModelConfig(
    layer_count=1, head_count=2, embed_dim=8, ff_dim=16, bin_count=8, max_features=4, t_encoder_hidden=8
)


def _check_grid(grid: BinGrid) -> tuple[bool, str]:
    if not grid.is_monotone():
        return False, "edges not strictly increasing"
    return grid.is_uniform(), f"L={grid.bin_count} width={grid.width:.6g}"


def _check_histogram_loss(grid: BinGrid) -> tuple[bool, str]:
    rng = derive_stream(0, "selfcheck/histogram")
    worst = 0.0
    for bins in (8, grid.bin_count):
        for _ in range(20):
            q, target = rng.dirichlet(np.ones(bins)), rng.dirichlet(np.ones(bins))
            oracle = 0.0
            for l in range(bins):
                oracle -= target[l] * np.log(max(q[l], 1e-12))
            got = histogram_loss(HistogramDistribution(q), HistogramDistribution(target))
            worst = max(worst, abs(got - oracle))
    return worst < 1e-10, f"max abs error {worst:.2e}"


def _check_bin_mass(grid: BinGrid) -> tuple[bool, str]:
    rng = derive_stream(0, "selfcheck/binmass")
    worst_sum, worst_bin = 0.0, 0.0
    for _ in range(20):
        mu, sigma = rng.uniform(-12.0, 12.0), float(np.exp(rng.uniform(np.log(1e-3), np.log(5.0))))
        probs = gaussian_bin_mass(mu, sigma, grid).probs
        cdf = 0.5 * (1.0 + erf((grid.edges - mu) / (sigma * np.sqrt(2.0))))
        cdf[0], cdf[-1] = 0.0, 1.0
        worst_sum = max(worst_sum, abs(probs.sum() - 1.0))
        worst_bin = max(worst_bin, float(np.abs(probs - np.diff(cdf)).max()))
    return worst_sum < 1e-12 and worst_bin < 1e-9, f"sum error {worst_sum:.2e}, bin error {worst_bin:.2e}"


def _check_crps(grid: BinGrid) -> tuple[bool, str]:
    bins = grid.bin_count
    uniform = HistogramDistribution(np.full(bins, 1.0 / bins))
    got = crps_loss(uniform, grid, grid.lo)
    closed = sum((k / bins - 1.0) ** 2 * grid.width for k in range(1, bins + 1))
    return abs(got - closed) < 1e-10, f"CRPS {got:.12g} vs {closed:.12g}"


def _check_mise(_: BinGrid) -> tuple[bool, str]:
    grid = treatment_grid(65)
    rng = derive_stream(0, "selfcheck/mise")
    truth = rng.standard_normal((10, 65))
    offset = mise(truth + 0.3, truth, grid)
    coarse = mise(grid, np.zeros(65), grid)
    fine_grid = treatment_grid(641)
    fine = mise(fine_grid, np.zeros(641), fine_grid)
    ok = abs(offset - 0.09) < 1e-12 and abs(coarse - fine) / fine < 1e-3 and abs(coarse - 1 / 3) < 1e-3
    return ok, f"offset {offset:.3g}, quadratic {coarse:.6g} / {fine:.6g}"


def _check_dpe(_: BinGrid) -> tuple[bool, str]:
    grid = treatment_grid(65)
    truth = -((grid - 0.5) ** 2)
    wrong = np.where(grid == 0.0, 1.0, 0.0)
    quadratic = dpe(wrong, truth, grid, OptimumMode.MAX)
    shifted = dpe(truth + 7.0, truth, grid, OptimumMode.MAX)
    return abs(quadratic - 0.0625) < 1e-12 and shifted == 0.0, f"quadratic {quadratic:.6g}, shifted {shifted:.3g}"


def _check_kfold(_: BinGrid) -> tuple[bool, str]:
    rng = derive_stream(0, "selfcheck/kfold")
    for _ in range(50):
        n, seed = int(rng.integers(5, 200)), int(rng.integers(0, 2**31))
        folds = kfold_split(n, 5, seed)
        joined = np.concatenate(folds)
        sizes = [f.shape[0] for f in folds]
        if joined.shape[0] != n or set(joined.tolist()) != set(range(n)) or max(sizes) - min(sizes) > 1:
            return False, f"bad partition for n={n} seed={seed}"
    return True, "50 random partitions"


def _check_bernstein(_: BinGrid) -> tuple[bool, str]:
    t = np.linspace(0.0, 1.0, 101)
    worst = max(float(np.abs(bernstein_basis(t, degree).sum(axis=-1) - 1.0).max()) for degree in range(2, 9))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _check_prior(_: BinGrid) -> tuple[bool, str]:
    dgp, dataset = sample_dgp_dataset(RunConfig(n_samples=128), seed=11)
    split = dgp.split
    row = 0
    ok = (
        split.size == dataset.n_covariates
        and treatment_edges_protected(dgp)
        and float(dataset.t.min()) == 0.0
        and float(dataset.t.max()) == 1.0
        and query_cepo(dgp, row, float(dataset.t_cf[row])) == float(dataset.cepo_cf[row])
    )
    return ok, f"K={dataset.n_covariates} conf={len(split.conf_indices)}"


def _check_gradients(_: BinGrid) -> tuple[bool, str]:
    config = RunConfig(toy=TINY_TOY)
    rng = derive_stream(0, "selfcheck/gradients")
    x, t, y = rng.standard_normal((16, 3)), rng.uniform(size=16), rng.standard_normal(16)
    batch = make_token_batch(x[:8], t[:8], y[:8], x[8:], t[8:], TINY_TOY.max_features)
    target_z = rng.standard_normal(8)
    grid = BinGrid.uniform(TINY_TOY.bin_count, -3.0, 3.0)
    batch = replace(batch, targets=gaussian_bin_mass(target_z, 0.5, grid).probs, target_z=target_z)
    result = gradient_check(build_model(config, 0), batch, config, epsilon=1e-5, coordinates=64)
    return result.max_rel_error < 1e-4, f"max relative error {result.max_rel_error:.2e}"


CHECKS: tuple[tuple[str, Callable[[BinGrid], tuple[bool, str]]], ...] = (
    ("BinGrid monotonicity", _check_grid),
    ("histogram loss oracle", _check_histogram_loss),
    ("gaussian bin mass oracle", _check_bin_mass),
    ("CRPS closed form", _check_crps),
    ("MISE analytic cases", _check_mise),
    ("DPE analytic cases", _check_dpe),
    ("kfold partition", _check_kfold),
    ("Bernstein partition of unity", _check_bernstein),
    ("prior invariants", _check_prior),
    ("gradient check", _check_gradients),
)


def run_selfcheck(grid: BinGrid | None = None) -> list[CheckResult]:
    """Run every check; a check that raises counts as failed."""
    grid = grid if grid is not None else BinGrid.uniform(1024, -10.0, 10.0)
    results = []
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = check(grid)
        except Exception as exc:
            passed, detail = False, f"{exc.__class__.__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
        logger.debug("%s: %s (%s)", name, "ok" if passed else "FAILED", detail)
    return results
