"""Labeled splittable random streams.

Every source of randomness in the package derives from one master seed via
``stream(master, *labels)``.  Labels are hashed into a Philox key, so each
(stage, group, channel, batch) combination gets an independent counter-based
stream and adding a new consumer never perturbs existing ones.
"""

import hashlib

import numpy as np


def _digest(keys) -> list[int]:
    h = hashlib.sha256()
    for k in keys:
        h.update(repr(k).encode())
        h.update(b"\x00")
    d = h.digest()
    return [int.from_bytes(d[i : i + 8], "little") for i in range(0, 16, 8)]


def stream(*keys) -> np.random.Generator:
    """Return a Generator uniquely determined by the label tuple."""
    return np.random.Generator(np.random.Philox(key=_digest(keys)))


def spawn_seed(*keys) -> int:
    """A 63-bit integer seed derived from the label tuple."""
    return _digest(keys)[0] & (2**63 - 1)
