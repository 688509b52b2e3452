"""Splittable, counter-based random streams.

Every stream is a Philox4x64 generator whose 128-bit key is hashed from a
master seed and a path of integers (repetition index, stream tag, ...). Two
streams never share state, so work can be split across workers in any order
and still reproduce bit for bit.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

# Stream tags keep the sample draw and the bootstrap of one repetition apart.
TAG_SAMPLE = 1
TAG_BOOTSTRAP = 2
TAG_AUX = 3


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Hash ``seed`` and ``path`` into a new 64-bit seed (splitmix64 mixing)."""
    state = _mix64((seed & _MASK) + _GAMMA)
    for i, word in enumerate(path):
        state = _mix64(state ^ _mix64((word & _MASK) + (i + 2) * _GAMMA))
    return state


def generator(seed: int, *path: int) -> np.random.Generator:
    key = (derive_seed(seed, *path, 0) << 64) | derive_seed(seed, *path, 1)
    return np.random.Generator(np.random.Philox(key=key))


def block_integers(n: int, seed: int, first_block: int, n_blocks: int) -> np.ndarray:
    """Integers in ``[0, n)`` for blocks ``first_block .. first_block + n_blocks - 1``.

    Block ``b`` holds ``n`` values read from a fixed counter window of the
    Philox stream keyed by ``seed``, so its content depends only on
    ``(seed, b)`` and not on which other blocks were generated.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n >= 1 << 32:
        raise ValueError("n must be below 2**32")
    words_per_block = -(-n // 4) * 4
    key = (derive_seed(seed, 0) << 64) | derive_seed(seed, 1)
    bitgen = np.random.Philox(key=key)
    if first_block:
        bitgen.advance(first_block * (words_per_block // 4))
    raw = bitgen.random_raw(n_blocks * words_per_block).reshape(n_blocks, words_per_block)[:, :n]
    # Multiply-shift on the top 32 bits: exact for powers of two, bias < n / 2**32.
    return ((raw >> np.uint64(32)) * np.uint64(n) >> np.uint64(32)).astype(np.intp)
