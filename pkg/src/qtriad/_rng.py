"""Deterministic substream derivation for seeded simulations.

Every stochastic component draws from its own named substream of a single
session seed, so that e.g. a cheat model consuming randomness can never
shift basis choices, and Monte Carlo chunks are reproducible regardless of
how they are scheduled.
"""

from __future__ import annotations

import numpy as np

# Fixed substream tags. Values are part of the reproducibility contract:
# changing them changes every seeded transcript.
QUANTUM = 0
ALICE_BASIS = 1
BOB_BASIS = 2
CHARLIE_BASIS = 3
ALICE_CHEAT = 4
BOB_CHEAT = 5
MC_CHUNK = 6
SIMPLEX = 7


def substream(seed: int, *tags: int) -> np.random.Generator:
    """Return a generator for the (seed, *tags) substream.

    Distinct tag tuples yield independent streams; equal tuples yield
    identical streams in any process.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, tags)])))
