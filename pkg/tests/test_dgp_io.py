import json

import pytest

from ccgen.exceptions.data import ChecksumMismatch, ParseError, UnsupportedVersion
from ccgen.models.config import PriorKind, RunConfig
from ccgen.operations.dgp_io import dgp_spec, load_dgp_spec, replay_dgp, save_dgp_spec
from ccgen.operations.dgp_ops import dataset_digest, sample_dgp_dataset


@pytest.mark.parametrize("prior", list(PriorKind))
def test_spec_replays_identical_dataset(tmp_path, prior):
    config = RunConfig(prior=prior, n_samples=128, seed=13)
    dgp, dataset = sample_dgp_dataset(config, seed=13, index=2)
    path = save_dgp_spec(dgp_spec(dgp, dataset, config), tmp_path / "dgp.spec.json")

    spec = load_dgp_spec(path)
    assert spec == dgp_spec(dgp, dataset, config)
    replayed, replayed_dataset, replayed_config = replay_dgp(spec)
    assert replayed_config == config
    assert dataset_digest(replayed_dataset) == dataset_digest(dataset)
    assert replayed.index == 2


def test_three_mlp_spec_records_split(three_mlp_draw, small_config):
    dgp, dataset = three_mlp_draw
    spec = dgp_spec(dgp, dataset, small_config)
    assert spec.split["conf"] == list(dgp.split.conf_indices)
    assert spec.hyperparams["n_covariates"] == dataset.n_covariates
    assert spec.attempt == dgp.retries


def test_tampered_digest(tmp_path, three_mlp_draw, small_config):
    dgp, dataset = three_mlp_draw
    spec = dgp_spec(dgp, dataset, small_config).model_copy(update={"dataset_sha256": "0" * 64})
    with pytest.raises(ChecksumMismatch):
        replay_dgp(spec)


def test_unknown_version(tmp_path, three_mlp_draw, small_config):
    dgp, dataset = three_mlp_draw
    path = save_dgp_spec(dgp_spec(dgp, dataset, small_config), tmp_path / "dgp.spec.json")
    data = json.loads(path.read_text())
    data["format_version"] = 99
    path.write_text(json.dumps(data))
    with pytest.raises(UnsupportedVersion):
        load_dgp_spec(path)


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.spec.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_dgp_spec(path)
