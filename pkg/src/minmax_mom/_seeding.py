"""Deterministic seed derivation.

Every random stream in the package descends from one user seed. Child seeds
are obtained by folding integer keys into the parent with the SplitMix64
finalizer::

    z = (state + 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z =  z ^ (z >> 31)

``derive_seed(seed, a, b)`` applies the mix to ``seed``, xors in ``a``,
mixes again, xors in ``b`` and mixes a final time.
"""

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Mix integer ``keys`` into ``seed`` and return a 64-bit child seed."""
    z = splitmix64(int(seed) & _MASK)
    for key in keys:
        z = splitmix64(z ^ (int(key) & _MASK))
    return z


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    if keys:
        seed = derive_seed(seed, *keys)
    return np.random.default_rng(int(seed) & _MASK)
