"""Hashing and seed derivation helpers."""

import hashlib
import json

import numpy as np


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def digest(obj):
    """Short SHA-256 digest of the canonical JSON form of ``obj``."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


def derive_seed(*parts):
    """Stable 63-bit seed from any mix of ints and strings."""
    h = hashlib.sha256(canonical_json(list(parts)).encode()).digest()
    return int.from_bytes(h[:8], "little") >> 1


def rng(*parts):
    return np.random.default_rng(derive_seed(*parts))
