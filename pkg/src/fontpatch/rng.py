"""Deterministic, splittable random streams.

Every stochastic component takes an explicit generator derived from a
64-bit seed plus an integer key path, so parallel workers can derive
disjoint streams without sharing mutable state.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based (Philox) generator for (seed, *key).

    Distinct key paths yield statistically independent streams; the same
    path always reproduces the same sequence.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
