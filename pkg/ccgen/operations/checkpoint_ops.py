"""Toy-model checkpoints.

Layout (little endian)::

    b"CCGN" | u16 version | u32 n | n bytes of JSON {"config": RunConfig, "dtype": name}
    | u64 p | p float64 parameters | 32-byte SHA-256 of everything before it
"""

import hashlib
import json
import struct
from pathlib import Path

import numpy as np
import torch
from torch.nn.utils import parameters_to_vector, vector_to_parameters

from ccgen.exceptions.data import ChecksumMismatch, ParseError, UnsupportedVersion
from ccgen.log import get_logger
from ccgen.models.config import RunConfig, build_config
from ccgen.operations.toy_model import ToyModel, count_parameters

logger = get_logger(__name__)

MAGIC = b"CCGN"
CHECKPOINT_VERSION = 1
_DIGEST = 32
_DTYPES = {"float32": torch.float32, "float64": torch.float64}


def checkpoint_bytes(model: ToyModel, config: RunConfig) -> bytes:
    dtype = str(next(model.parameters()).dtype).removeprefix("torch.")
    header = json.dumps(
        {"config": config.model_dump(mode="json"), "dtype": dtype}, sort_keys=True
    ).encode("utf-8")
    params = parameters_to_vector(model.parameters()).detach().cpu().double().numpy().astype("<f8")
    body = b"".join(
        [
            MAGIC,
            struct.pack("<H", CHECKPOINT_VERSION),
            struct.pack("<I", len(header)),
            header,
            struct.pack("<Q", params.shape[0]),
            params.tobytes(),
        ]
    )
    return body + hashlib.sha256(body).digest()


def save_checkpoint(model: ToyModel, config: RunConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(model, config))
    logger.info("Saved checkpoint with %d parameters to %s", count_parameters(model), path)
    return path


def parse_checkpoint(blob: bytes, source: str = "checkpoint") -> tuple[ToyModel, RunConfig]:
    if len(blob) < len(MAGIC) + 2 + 4 + 8 + _DIGEST or blob[: len(MAGIC)] != MAGIC:
        raise ParseError(f"{source} is not a ccgen checkpoint")
    body, digest = blob[:-_DIGEST], blob[-_DIGEST:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumMismatch(source)
    offset = len(MAGIC)
    (version,) = struct.unpack_from("<H", body, offset)
    if version != CHECKPOINT_VERSION:
        raise UnsupportedVersion("checkpoint", version)
    offset += 2
    (header_len,) = struct.unpack_from("<I", body, offset)
    offset += 4
    meta = json.loads(body[offset : offset + header_len].decode("utf-8"))
    if not isinstance(meta, dict) or "config" not in meta or meta.get("dtype") not in _DTYPES:
        raise ParseError(f"{source} has a malformed header")
    config = build_config(meta["config"])
    dtype = _DTYPES[meta["dtype"]]
    offset += header_len
    (count,) = struct.unpack_from("<Q", body, offset)
    offset += 8
    params = np.frombuffer(body, dtype="<f8", count=count, offset=offset)

    model = ToyModel(config.toy).to(dtype)
    if count != count_parameters(model):
        raise ParseError(f"{source} holds {count} parameters, model expects {count_parameters(model)}")
    vector_to_parameters(torch.as_tensor(params.copy(), dtype=dtype), model.parameters())
    return model, config


def load_checkpoint(path: str | Path) -> tuple[ToyModel, RunConfig]:
    path = Path(path)
    return parse_checkpoint(path.read_bytes(), str(path))
