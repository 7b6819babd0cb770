"""Curve predictors: ground-truth oracle, reference baselines and the toy model."""

import numpy as np
from sklearn.neighbors import KNeighborsRegressor
from sklearn.preprocessing import StandardScaler

from ccgen.exceptions.base import UsageError
from ccgen.exceptions.data import InsufficientContext
from ccgen.exceptions.prior import PriorExhausted
from ccgen.log import get_logger
from ccgen.models.config import RunConfig
from ccgen.models.evaluation import ComparisonRow, ContextSet, EvalSource
from ccgen.operations.dgp_ops import cepo_surface, sample_dgp_dataset
from ccgen.operations.eval_ops import mise, treatment_grid
from ccgen.operations.rng_ops import derive_stream
from ccgen.operations.toy_model import ToyModel
from ccgen.operations.train_ops import predict_curves

logger = get_logger(__name__)

BASELINES = ("oracle", "context_mean", "knn")


def baseline_context_mean(context: ContextSet, x: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """The context outcome mean at every grid point, one row per query."""
    if context.size == 0:
        raise InsufficientContext("Context-mean baseline needs a non-empty context")
    return np.full((np.atleast_2d(x).shape[0], np.asarray(grid).shape[0]), float(np.mean(context.y)))


def _knn_model(context: ContextSet, k_neighbors: int) -> tuple[StandardScaler, KNeighborsRegressor]:
    if context.size == 0:
        raise InsufficientContext("k-NN baseline needs a non-empty context")
    features = np.column_stack([context.covariates, context.t])
    scaler = StandardScaler().fit(features)
    knn = KNeighborsRegressor(n_neighbors=min(k_neighbors, context.size))
    knn.fit(scaler.transform(features), context.y)
    return scaler, knn


def baseline_knn_cepo(context: ContextSet, x: np.ndarray, t: np.ndarray | float, k_neighbors: int) -> np.ndarray:
    """Mean y of the k nearest context rows in standardized joint (x, t) space."""
    x = np.atleast_2d(x)
    t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
    scaler, knn = _knn_model(context, k_neighbors)
    return knn.predict(scaler.transform(np.column_stack([x, t])))


class OraclePredictor:
    """Returns the ground-truth surface of the evaluated rows."""

    name = "oracle"

    def __init__(self, source: EvalSource):
        self.source = source
        self._cache: dict[bytes, np.ndarray] = {}

    def predict(self, context: ContextSet, x: np.ndarray, grid: np.ndarray, rows: np.ndarray) -> np.ndarray:
        key = np.asarray(grid, dtype=float).tobytes()
        if key not in self._cache:
            self._cache[key] = self.source.surface(grid)
        return self._cache[key][rows]


class ContextMeanPredictor:
    name = "context_mean"

    def predict(self, context: ContextSet, x: np.ndarray, grid: np.ndarray, rows: np.ndarray) -> np.ndarray:
        return baseline_context_mean(context, x, grid)


class KnnPredictor:
    name = "knn"

    def __init__(self, k_neighbors: int = 10):
        self.k_neighbors = k_neighbors

    def predict(self, context: ContextSet, x: np.ndarray, grid: np.ndarray, rows: np.ndarray) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        q, g = x.shape[0], grid.shape[0]
        scaler, knn = _knn_model(context, self.k_neighbors)
        queries = np.column_stack([np.repeat(x, g, axis=0), np.tile(grid, q)])
        return knn.predict(scaler.transform(queries)).reshape(q, g)


class ToyPredictor:
    name = "toy"

    def __init__(self, model: ToyModel, config: RunConfig):
        self.model = model
        self.config = config

    def predict(self, context: ContextSet, x: np.ndarray, grid: np.ndarray, rows: np.ndarray) -> np.ndarray:
        return predict_curves(self.model, self.config, context, x, grid)


def baseline_predictor(name: str, source: EvalSource, config: RunConfig):
    if name == "oracle":
        return OraclePredictor(source)
    if name == "context_mean":
        return ContextMeanPredictor()
    if name == "knn":
        return KnnPredictor(config.knn_neighbors)
    raise UsageError(f"Unknown baseline: {name} (expected one of {', '.join(BASELINES)})")


def compare_on_prior(
    model: ToyModel, config: RunConfig, seeds: list[int], query_rows: int = 64
) -> list[ComparisonRow]:
    """Held-out MISE of the toy model and both baselines on fresh prior DGPs.

    Each DGP contributes ``train_rows`` shuffled rows: the first half is the
    context, up to ``query_rows`` of the rest are queried.
    """
    grid = treatment_grid(config.grid_points)
    predictors = (ToyPredictor(model, config), ContextMeanPredictor(), KnnPredictor(config.knn_neighbors))
    results = []
    for seed in seeds:
        try:
            dgp, dataset = sample_dgp_dataset(config, seed)
        except PriorExhausted as exc:
            logger.warning("Skipping held-out seed %d: %s", seed, exc.detail)
            continue
        rows = derive_stream(seed, "compare").permutation(dataset.n_rows)[: config.train_rows]
        half = rows.shape[0] // 2
        ctx, qry = rows[:half], rows[half : half + query_rows]
        context = ContextSet(dataset.covariates[ctx], dataset.t[ctx], dataset.y[ctx])
        truth = cepo_surface(dgp, grid)[qry]
        scores = {p.name: mise(p.predict(context, dataset.covariates[qry], grid, qry), truth, grid) for p in predictors}
        results.append(
            ComparisonRow(
                seed=seed, toy_mise=scores["toy"], context_mean_mise=scores["context_mean"], knn_mise=scores["knn"]
            )
        )
        logger.info(
            "held-out seed %d: toy %.4g, context-mean %.4g, knn %.4g",
            seed, scores["toy"], scores["context_mean"], scores["knn"],
        )
    return results
