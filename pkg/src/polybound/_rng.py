"""Counter-based randomness: one 64-bit seed, independent Philox streams."""

from __future__ import annotations

import numpy as np


def philox(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator; distinct streams never collide."""
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) + (int(stream) << 64)
    return np.random.Generator(np.random.Philox(key=key))
