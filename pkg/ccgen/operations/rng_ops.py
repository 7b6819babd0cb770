"""Seeded random streams.

Every random draw in the package comes from a numpy ``Generator`` over the
counter-based Philox bit generator. A stream is keyed by
``(seed, purpose tag, *indices)`` so that independent purposes (hyperparameters,
covariate noise, role split, ...) and independent DGP indices never share
state, and can be produced in any order or in parallel.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _tag_key(tag: str) -> int:
    return int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "little")


def derive_stream(seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Return the generator for ``(seed, tag, *indices)``."""
    entropy = [seed & _MASK64, _tag_key(tag)] + [int(i) & _MASK64 for i in indices]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, tag: str, *indices: int) -> int:
    """A 32-bit integer seed for libraries that take plain ints (torch, sklearn)."""
    return int(derive_stream(seed, tag, *indices).integers(0, 2**32))
