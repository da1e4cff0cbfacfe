"""A deterministic synthetic environment for demos and end-to-end tests.

The map is a walled arena with two partition walls, door gaps, and a few
soft obstacles.  A small seeded dither keeps every cell's occupancy value
generic: no two distinct blocks average to exactly the same conditional,
which keeps the high-beta limit well-behaved for both search algorithms.
"""

from __future__ import annotations

import numpy as np

from .world import OccupancyField

DEMO_SEED = 8
_DITHER = 0.02


def demo_occupancy(side: int = 128, seed: int = DEMO_SEED) -> OccupancyField:
    """Build the demo occupancy field at a power-of-two side length."""
    if side < 32 or side & (side - 1):
        raise ValueError("demo map side must be a power of two >= 32")

    def span(lo: float, hi: float) -> slice:
        return slice(int(round(lo * side)), int(round(hi * side)))

    base = np.zeros((side, side))
    wall = 2 / 128
    base[span(0.0, wall), :] = 1.0
    base[span(1.0 - wall, 1.0), :] = 1.0
    base[:, span(0.0, wall)] = 1.0
    base[:, span(1.0 - wall, 1.0)] = 1.0
    # vertical partition with a doorway
    base[span(wall, 0.75), span(0.34, 0.37)] = 1.0
    base[span(0.30, 0.42), span(0.34, 0.37)] = 0.0
    # horizontal partition with a doorway
    base[span(0.55, 0.58), span(0.37, 1.0 - wall)] = 1.0
    base[span(0.55, 0.58), span(0.64, 0.72)] = 0.0
    # soft obstacles
    base[span(0.12, 0.24), span(0.62, 0.86)] = 0.85
    base[span(0.78, 0.92), span(0.10, 0.27)] = 0.6
    base[span(0.16, 0.21), span(0.10, 0.18)] = 0.4
    rows, cols = np.indices((side, side))
    disc = (rows - 0.78 * side) ** 2 + (cols - 0.75 * side) ** 2 <= (0.09 * side) ** 2
    base[disc] = 0.9

    rng = np.random.default_rng(seed)
    occupied = base * (1.0 - _DITHER) + rng.random((side, side)) * _DITHER
    cond = np.stack([1.0 - occupied, occupied], axis=-1)
    return OccupancyField(width=side, height=side, cond=cond)
