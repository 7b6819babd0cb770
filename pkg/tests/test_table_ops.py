import numpy as np
import pytest

from ccgen.exceptions.data import EmptyTable, HeaderMismatch, ParseError
from ccgen.models.table import BenchmarkTable, benchmark_header
from ccgen.operations.table_ops import (
    load_covariates,
    read_benchmark_csv,
    table_from_dataset,
    write_benchmark_csv,
)


def _random_table(rng, n=5, k=3) -> BenchmarkTable:
    return BenchmarkTable(
        covariates=rng.standard_normal((n, k)) * 1e3,
        t=rng.uniform(size=n),
        y=rng.standard_normal(n) * 1e-4,
        t_test=rng.uniform(size=n),
        cepo_test=rng.standard_normal(n),
    )


def test_header():
    assert ",".join(benchmark_header(2)) == "x_0,x_1,t,y,t_test,cepo_test"


def test_round_trip(tmp_path, rng):
    table = _random_table(rng)
    path = write_benchmark_csv(table, tmp_path / "bench.csv")
    back = read_benchmark_csv(path)
    assert back.header == table.header
    rel = np.abs(back.matrix() - table.matrix()) / np.maximum(np.abs(table.matrix()), 1e-300)
    assert rel.max() <= 1e-9
    assert path.read_text(encoding="utf-8").splitlines()[0] == "x_0,x_1,x_2,t,y,t_test,cepo_test"


def test_table_shape_check(rng):
    with pytest.raises(ValueError):
        BenchmarkTable(np.zeros((3, 2)), np.zeros(3), np.zeros(2), np.zeros(3), np.zeros(3))


def test_missing_oracle_column(tmp_path):
    path = tmp_path / "bench.csv"
    path.write_text("x_0,t,y,t_test\n1,0.5,2,0.3\n")
    with pytest.raises(HeaderMismatch):
        read_benchmark_csv(path)


def test_non_numeric_cell_is_located(tmp_path):
    path = tmp_path / "bench.csv"
    path.write_text("x_0,t,y,t_test,cepo_test\n1,0.5,2,0.3,1\n1,abc,2,0.3,1\n")
    with pytest.raises(ParseError) as info:
        read_benchmark_csv(path)
    assert info.value.row == 2
    assert info.value.column == "t"
    assert info.value.exit_code == 2


def test_header_only_is_empty(tmp_path):
    path = tmp_path / "bench.csv"
    path.write_text("x_0,t,y,t_test,cepo_test\n")
    with pytest.raises(EmptyTable):
        read_benchmark_csv(path)


def test_table_from_dataset(three_mlp_draw):
    _, dataset = three_mlp_draw
    table = table_from_dataset(dataset)
    assert table.n_covariates == dataset.n_covariates
    np.testing.assert_array_equal(table.cepo_test, dataset.cepo_cf)
    assert table.is_finite()


class TestLoadCovariates:
    def test_numeric(self, tmp_path):
        path = tmp_path / "cov.csv"
        path.write_text("a,b\n1,2\n3,4\n5,6\n")
        np.testing.assert_array_equal(load_covariates(path), [[1, 2], [3, 4], [5, 6]])

    def test_categories_in_order_of_first_occurrence(self, tmp_path):
        path = tmp_path / "cov.csv"
        path.write_text("color,w\na,1\nb,2\na,3\n")
        np.testing.assert_array_equal(load_covariates(path)[:, 0], [0.0, 1.0, 0.0])

    def test_mixed_column_rejected(self, tmp_path):
        path = tmp_path / "cov.csv"
        path.write_text("a,b\n1,2\nx,4\n")
        with pytest.raises(ParseError) as info:
            load_covariates(path)
        assert info.value.column == "a"

    def test_missing_rows_dropped(self, tmp_path):
        path = tmp_path / "cov.csv"
        path.write_text("a,b\n1,2\n,4\n5,6\n")
        assert load_covariates(path).shape == (2, 2)

    def test_all_rows_missing(self, tmp_path):
        path = tmp_path / "cov.csv"
        path.write_text("a,b\n,2\n3,\n")
        with pytest.raises(EmptyTable):
            load_covariates(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="nope.csv"):
            load_covariates(tmp_path / "nope.csv")
