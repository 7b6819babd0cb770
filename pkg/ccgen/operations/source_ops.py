"""Ground-truth sources for evaluation: scenarios, DGP specs and benchmark CSVs with sidecars."""

from pathlib import Path

import numpy as np

from ccgen.exceptions.data import ChecksumMismatch, OracleMissing
from ccgen.log import get_logger
from ccgen.models.config import RunConfig
from ccgen.models.evaluation import EvalSource
from ccgen.models.scenario import BUILTIN_GAUSSIAN
from ccgen.models.table import BenchmarkTable
from ccgen.operations.dgp_io import load_dgp_spec, replay_dgp
from ccgen.operations.dgp_ops import sample_dgp_dataset
from ccgen.operations.eval_ops import source_from_dgp, source_from_scenario
from ccgen.operations.scenario_ops import read_scenario_metadata, realize_scenario, resolve_scenario
from ccgen.operations.table_ops import read_benchmark_csv

logger = get_logger(__name__)


def spec_path(csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".spec.json")


def scenario_source(scenario_id: str, seed: int, covariate_path: str | Path | None = None) -> EvalSource:
    return source_from_scenario(realize_scenario(resolve_scenario(scenario_id, covariate_path), seed))


def spec_source(path: str | Path) -> EvalSource:
    dgp, dataset, _ = replay_dgp(load_dgp_spec(path))
    return source_from_dgp(dgp, dataset, name=Path(path).stem)


def generated_source(config: RunConfig, seed: int, index: int = 0) -> EvalSource:
    dgp, dataset = sample_dgp_dataset(config, seed, index)
    return source_from_dgp(dgp, dataset, name=f"{config.prior.value}/{index}")


def _same_table(read: BenchmarkTable, rebuilt: BenchmarkTable) -> bool:
    if read.matrix().shape != rebuilt.matrix().shape:
        return False
    return bool(np.allclose(read.matrix(), rebuilt.matrix(), rtol=0.0, atol=1e-12))


def csv_source(path: str | Path) -> EvalSource:
    """A benchmark CSV is only scoreable next to a scenario sidecar or a DGP spec.

    The CEPO at one test treatment per row cannot give MISE or DPE, so the
    oracle is rebuilt from the sidecar and checked against the file.
    """
    path = Path(path)
    table = read_benchmark_csv(path)
    meta = read_scenario_metadata(path)
    if meta is not None:
        covariates = None if meta.covariate_source == BUILTIN_GAUSSIAN else meta.covariate_source
        realized = realize_scenario(resolve_scenario(meta.name, covariates), meta.seed)
        if not _same_table(table, realized.table):
            raise ChecksumMismatch(f"{path} against scenario {meta.name} seed {meta.seed}")
        return source_from_scenario(realized)
    spec = spec_path(path)
    if spec.is_file():
        source = spec_source(spec)
        if table.n_rows != source.n_rows or not np.allclose(table.covariates, source.covariates, rtol=0.0, atol=1e-12):
            raise ChecksumMismatch(f"{path} against {spec.name}")
        return source
    logger.error("No scenario sidecar or DGP spec next to %s", path)
    raise OracleMissing()
