"""Reproducible random substreams keyed by replicate/stream indices."""
import numpy as np


def substream(master_seed, *key):
    """
    Build an independent generator for one (replicate, stream) slot.

    The stream depends only on ``(master_seed, *key)``, so the same slot yields
    the same draws whichever worker process evaluates it.

    Args:
        master_seed: Non-negative run seed
        *key: Non-negative integers identifying the slot, e.g. (replicate, attempt, stream)

    Returns:
        numpy.random.Generator: PCG64 generator
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, key)]))


def fresh_seed():
    """Draw a seed from OS entropy, small enough to print and pass back via --seed."""
    return int(np.random.SeedSequence().entropy % (2 ** 63))
