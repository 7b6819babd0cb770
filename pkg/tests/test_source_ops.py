import numpy as np
import pytest

from ccgen.exceptions.data import ChecksumMismatch, OracleMissing
from ccgen.models.config import RunConfig
from ccgen.models.scenario import OptimumMode
from ccgen.operations.dgp_io import dgp_spec, save_dgp_spec
from ccgen.operations.dgp_ops import cepo_surface, sample_dgp_dataset
from ccgen.operations.eval_ops import treatment_grid
from ccgen.operations.scenario_ops import builtin_scenario, realize_scenario, write_scenario_metadata
from ccgen.operations.source_ops import csv_source, generated_source, spec_path
from ccgen.operations.table_ops import table_from_dataset, write_benchmark_csv


@pytest.fixture
def scenario_csv(tmp_path):
    realized = realize_scenario(builtin_scenario("vshape"), seed=2)
    path = write_benchmark_csv(realized.table, tmp_path / "vshape_2.csv")
    write_scenario_metadata(realized, path)
    return path, realized


@pytest.fixture
def generated_csv(tmp_path):
    config = RunConfig(n_samples=128)
    dgp, dataset = sample_dgp_dataset(config, seed=4)
    path = write_benchmark_csv(table_from_dataset(dataset), tmp_path / "dgp_0000.csv")
    save_dgp_spec(dgp_spec(dgp, dataset, config), spec_path(path))
    return path, dataset


def test_spec_path():
    assert spec_path("out/gen/dgp_0003.csv").name == "dgp_0003.spec.json"


def test_scenario_sidecar(scenario_csv):
    path, realized = scenario_csv
    source = csv_source(path)
    assert source.name == "vshape"
    assert source.optimum_mode is OptimumMode.MIN
    grid = treatment_grid(9)
    np.testing.assert_array_equal(source.surface(grid), cepo_surface(realized, grid))


def test_dgp_spec_sidecar(generated_csv):
    path, dataset = generated_csv
    source = csv_source(path)
    assert source.n_rows == dataset.n_rows
    assert source.optimum_mode is OptimumMode.MAX
    assert source.surface(treatment_grid(5)).shape == (dataset.n_rows, 5)


def test_bare_csv_has_no_oracle(tmp_path, generated_csv):
    path, _ = generated_csv
    bare = tmp_path / "bare.csv"
    bare.write_bytes(path.read_bytes())
    with pytest.raises(OracleMissing) as info:
        csv_source(bare)
    assert info.value.exit_code == 2


def test_edited_csv_is_rejected(scenario_csv):
    path, _ = scenario_csv
    lines = path.read_text().splitlines()
    cells = lines[1].split(",")
    cells[0] = "123.5"
    lines[1] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ChecksumMismatch):
        csv_source(path)


def test_generated_source_name():
    source = generated_source(RunConfig(n_samples=64), seed=0, index=3)
    assert source.name == "three_mlp/3"
    assert source.n_rows == 64
