"""Seeded counter-based random streams.

Every random draw goes through a Philox generator keyed by
``(seed, stream, index)`` so that per-electron draws do not depend on how
many other draws were made or in which order seeds are processed.
"""

import numpy as np

MAX_SEED = 2**64 - 1

# stream identifiers
ARRIVALS = 0
PHASES = 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def substream(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one ``(seed, stream, index)`` triple."""
    ss = np.random.SeedSequence((check_seed(seed), int(stream), int(index)))
    return np.random.Generator(np.random.Philox(ss))
