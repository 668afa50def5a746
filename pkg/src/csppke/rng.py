"""Seeded randomness: splittable Philox streams plus a vectorizable keyed mixer.

Every randomized operation in the package draws from a stream derived from a
single 64-bit seed and a tuple of labels (module name, trial index, ...), so
any experiment is reproducible from (params, seed) alone.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _label_bytes(labels: tuple[int | str, ...]) -> bytes:
    parts = []
    for label in labels:
        if isinstance(label, str):
            parts.append(label.encode("utf-8"))
        else:
            parts.append(int(label).to_bytes(8, "little", signed=False))
        parts.append(b"\xff")
    return b"".join(parts)


def stream(seed: int, *labels: int | str) -> np.random.Generator:
    """Independent counter-based generator for (seed, labels).

    Streams with distinct label tuples never collide; the same tuple always
    reproduces the same draws.
    """
    key = np.array([seed & _MASK64, _fnv1a(_label_bytes(labels))], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_key(rng: np.random.Generator) -> int:
    """Draw a fresh 64-bit subkey; used to key per-coordinate mixers."""
    return int(rng.integers(0, 1 << 64, dtype=np.uint64))


def mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer over a uint64 array (wraps mod 2^64)."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x


def mix64_int(x: int) -> int:
    """Scalar SplitMix64 finalizer on plain Python ints."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x
