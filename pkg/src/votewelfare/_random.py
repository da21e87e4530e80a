"""Seeding helpers.

Every stream is a PCG64 generator keyed by a ``numpy.random.SeedSequence``,
which is reproducible across platforms. Trial ``i`` of a run seeded with
``s`` uses ``SeedSequence(s, spawn_key=(i,))`` so trials can run in any
order or in parallel and still see the same draws.
"""

from __future__ import annotations

import numpy as np

_SCALE = 2.0**-52


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an int or SeedSequence, got {type(seed).__name__}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(int(seed))


def derive_seed(master, index: int) -> np.random.SeedSequence:
    """Child seed for trial ``index`` of a run seeded with ``master``."""
    parent = as_seed_sequence(master)
    return np.random.SeedSequence(
        parent.entropy, spawn_key=tuple(parent.spawn_key) + (int(index),)
    )


def raw_draws(seed, shape: tuple[int, ...]) -> np.ndarray:
    """Raw 64-bit words; row ``i`` depends only on (seed, i) for a fixed row width."""
    bitgen = np.random.PCG64(as_seed_sequence(seed))
    return bitgen.random_raw(shape)


def open_uniform(raws: np.ndarray) -> np.ndarray:
    """Map 64-bit words to doubles strictly inside (0, 1).

    Uses the top 52 bits: (k + 1/2) * 2**-52 lies in [2**-53, 1 - 2**-53],
    and every value is exactly representable.
    """
    return ((raws >> np.uint64(12)).astype(np.float64) + 0.5) * _SCALE
