import hashlib
import struct

import numpy as np
import pytest
import torch

from ccgen.exceptions.data import ChecksumMismatch, ParseError, UnsupportedVersion
from ccgen.models.evaluation import ContextSet
from ccgen.operations.checkpoint_ops import (
    MAGIC,
    checkpoint_bytes,
    load_checkpoint,
    parse_checkpoint,
    save_checkpoint,
)
from ccgen.operations.train_ops import build_model, predict_curves


@pytest.fixture
def saved(tmp_path, tiny_config):
    model = build_model(tiny_config, seed=3)
    return model, save_checkpoint(model, tiny_config, tmp_path / "model.ckpt")


def test_round_trip_predicts_identically(saved, tiny_config, three_mlp_draw):
    model, path = saved
    loaded, config = load_checkpoint(path)
    assert config == tiny_config
    _, dataset = three_mlp_draw
    context = ContextSet(dataset.covariates[:20], dataset.t[:20], dataset.y[:20])
    grid = np.linspace(0.0, 1.0, 9)
    np.testing.assert_array_equal(
        predict_curves(loaded, config, context, dataset.covariates[20:23], grid),
        predict_curves(model, tiny_config, context, dataset.covariates[20:23], grid),
    )


def test_bytes_are_stable(saved, tiny_config):
    model, path = saved
    assert checkpoint_bytes(model, tiny_config) == path.read_bytes()


def test_flipped_byte(saved):
    _, path = saved
    blob = bytearray(path.read_bytes())
    blob[len(blob) // 2] ^= 0x01
    with pytest.raises(ChecksumMismatch):
        parse_checkpoint(bytes(blob))


def test_bad_magic(saved):
    _, path = saved
    with pytest.raises(ParseError):
        parse_checkpoint(b"NOPE" + path.read_bytes()[4:])


def test_truncated():
    with pytest.raises(ParseError):
        parse_checkpoint(MAGIC + b"\x01")


def test_unknown_version(saved):
    _, path = saved
    body = path.read_bytes()[:-32]
    body = MAGIC + struct.pack("<H", 7) + body[len(MAGIC) + 2 :]
    with pytest.raises(UnsupportedVersion):
        parse_checkpoint(body + hashlib.sha256(body).digest())


def test_double_precision_model_round_trips(tmp_path, tiny_config):
    model = build_model(tiny_config, seed=5).double()
    loaded, _ = load_checkpoint(save_checkpoint(model, tiny_config, tmp_path / "double.ckpt"))
    for original, restored in zip(model.parameters(), loaded.parameters()):
        assert restored.dtype == torch.float64
        assert torch.equal(original, restored)
