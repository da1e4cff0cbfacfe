"""Leaf-block rendering of abstractions as dependency-free binary PPM images."""

from __future__ import annotations

import numpy as np

from . import quadtree
from .info import NodeStatsTable
from .quadtree import TreeAbstraction, node_offset

GRAY = (128, 128, 128)  # zero-mass leaves


def _occupied_index(stats: NodeStatsTable) -> int:
    labels = stats.outcomes.labels
    if "occupied" in labels:
        return labels.index("occupied")
    return len(labels) - 1


def render_abstraction(
    tree: TreeAbstraction, stats: NodeStatsTable, scale: int = 4
) -> bytes:
    """Render the leaf front as a binary PPM (P6).

    Each leaf block is filled with a shade linear in its occupied
    probability (white at 0, full red at 1; mid-gray for zero-mass leaves)
    and outlined with a 1-pixel black border.  The output is a pure
    function of its inputs, byte for byte.
    """
    scale = int(scale)
    if scale < 1:
        raise ValueError("render scale must be >= 1")
    if tree.depth_limit != stats.depth:
        raise ValueError(
            f"tree depth limit {tree.depth_limit} does not match stats depth {stats.depth}"
        )
    occ = _occupied_index(stats)
    side = (1 << stats.depth) * scale
    image = np.empty((side, side, 3), dtype=np.uint8)
    for leaf in quadtree.leaves(tree):
        region = quadtree.cell_region(leaf, tree.depth_limit)
        offset = node_offset(leaf)
        if stats.valid[offset]:
            p = float(stats.cond[offset, occ])
            fade = int(round(255.0 * (1.0 - min(max(p, 0.0), 1.0))))
            color = (255, fade, fade)
        else:
            color = GRAY
        r0 = region.row0 * scale
        c0 = region.col0 * scale
        r1 = r0 + region.size * scale
        c1 = c0 + region.size * scale
        image[r0:r1, c0:c1] = color
        image[r0, c0:c1] = 0
        image[r1 - 1, c0:c1] = 0
        image[r0:r1, c0] = 0
        image[r0:r1, c1 - 1] = 0
    header = f"P6\n{side} {side}\n255\n".encode("ascii")
    return header + image.tobytes()
