"""Deterministic random-number streams derived from a single root seed.

Every stochastic component draws from its own sub-stream, keyed by integer
path components under the root seed.  Streams with different keys are
statistically independent, and a draw on one stream never shifts another,
so enlarging a cohort or adding trees leaves previously generated values
untouched.
"""
from __future__ import annotations

import math

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the sub-stream at ``key`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def normal_deviate(rng: np.random.Generator) -> float:
    """Standard normal draw from two uniforms (Box-Muller).

    Uses exactly two uniform draws per call, keeping stream consumption
    easy to reason about.
    """
    u1 = rng.random()
    u2 = rng.random()
    # u1 is in [0, 1), so 1 - u1 is in (0, 1] and the log is finite.
    radius = math.sqrt(-2.0 * math.log1p(-u1))
    return radius * math.cos(2.0 * math.pi * u2)
