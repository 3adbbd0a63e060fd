"""Per-shot random numbers.

Draws come straight from PCG64's raw 64-bit output, so a seed gives the same
sequence on every platform and numpy version that ships PCG64. A uniform
double in [0, 1) takes the top 53 bits of one raw draw.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_SCALE = 2.0**-53


def shot_seed(base: int, shot: int) -> int:
    """Seed for shot ``shot`` of a run started with ``base``: ``(base + shot) mod 2**64``."""
    return (base + shot) & MASK64


class ShotRng:
    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._bg = np.random.PCG64(self.seed)

    def raw(self) -> int:
        return int(self._bg.random_raw())

    def uniform(self) -> float:
        return (self.raw() >> 11) * _SCALE
