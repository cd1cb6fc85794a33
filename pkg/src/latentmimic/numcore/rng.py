"""Seeded randomness: one PRNG family (PCG64) for everything.

All initialization and sampling in the package derives from a root seed
through SeedSequence spawning, so any artifact is bitwise reproducible
from (config, seed).
"""

from __future__ import annotations

import numpy as np


def generator(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for a (seed, stream...) key."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *stream])))


def truncated_normal(rng: np.random.Generator, shape, std: float = 0.02) -> np.ndarray:
    """Normal(0, std) with redraws outside +/-2 std."""
    out = rng.normal(0.0, std, size=shape)
    for _ in range(16):
        bad = np.abs(out) > 2.0 * std
        if not bad.any():
            break
        out[bad] = rng.normal(0.0, std, size=int(bad.sum()))
    return np.clip(out, -2.0 * std, 2.0 * std)
