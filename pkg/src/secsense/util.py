"""Small shared helpers: dB conversion, seed derivation, seeded generators."""

from __future__ import annotations

import hashlib
import math

import numpy as np

_MASK_128 = (1 << 128) - 1


def derive_seed(master: int, *indices: int) -> int:
    """Collision-free child seed for (master, trial, ...) tuples.

    Hash-based splitting: any change in the master seed or any index yields
    an unrelated 128-bit stream key, so parallel trials stay independent and
    reproducible.
    """
    payload = ":".join(str(int(v)) for v in (master, *indices)).encode()
    digest = hashlib.blake2b(payload, digest_size=16).digest()
    return int.from_bytes(digest, "little")


def db(x):
    """Power ratio -> dB. Zero maps to -inf without warnings."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -math.inf)
    np.log10(x, out=out, where=x > 0)
    out *= 10.0
    return float(out) if out.ndim == 0 else out


def undb(x):
    """dB -> linear power ratio."""
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by an arbitrary integer seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK_128))
