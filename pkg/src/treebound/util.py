"""Shared helpers: deterministic seed derivation, canonical JSON, numeric guards."""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction


def derive_seed(master: int, *labels) -> int:
    """Derive a child seed from a master seed and a label path.

    Stable across platforms and process restarts; independent children for
    distinct labels, so trial order / worker layout cannot change results.
    """
    key = repr((int(master),) + tuple(labels)).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def ceil_int(x, eps: float = 1e-9) -> int:
    """Ceiling that forgives float noise just below an integer."""
    if isinstance(x, Fraction):
        return -((-x.numerator) // x.denominator)
    return math.ceil(x - eps)


def floor_int(x, eps: float = 1e-9) -> int:
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    return math.floor(x + eps)


def canonical_json(obj) -> str:
    """Deterministic JSON serialization (sorted keys, repr-exact floats)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def frac(x) -> Fraction:
    """Exact rational value of a float/int/Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x)  # exact binary expansion of the float
