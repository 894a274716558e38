"""Deterministic seed derivation.

All randomness in this package flows through ``numpy.random.Generator``
instances backed by PCG64, created from 64-bit unsigned seeds.  Child
seeds are derived from a master seed with a splitmix64 chain, which is
cheap, stateless and reproducible across platforms.  Derivation is pure:
the same (master, parts) pair always yields the same child seed, so
repeats of an experiment can be dispatched in any order or on any number
of threads without changing their streams.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One step of the splitmix64 mixing function (Steele et al.)."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(master: int, *parts: int) -> int:
    """Derive a child seed from ``master`` and a tuple of integer labels.

    Each label is folded into the state with one splitmix64 step, so
    distinct label tuples give statistically independent streams.
    """
    state = splitmix64(int(master) & _MASK)
    for part in parts:
        state = splitmix64(state ^ (int(part) & _MASK))
    return state


def make_rng(seed: int) -> np.random.Generator:
    """A PCG64 generator for a 64-bit seed; the one generator family used everywhere."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK))
