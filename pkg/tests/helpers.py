"""Shared builders for randomized worlds and trees."""

from __future__ import annotations

import numpy as np

import quadib as qb


def make_random_world(rng, depth, n_outcomes=2, zero_block=False):
    """A random valid world: random prior, random per-cell conditionals.

    With zero_block=True a random aligned quadrant at depth 1 gets exactly
    zero mass, exercising the zero-mass conventions.
    """
    side = 1 << depth
    prior = rng.random((side, side)) ** 2 + 1e-3
    if zero_block and depth >= 1:
        half = side // 2
        corner = rng.integers(0, 4)
        r0 = (corner // 2) * half
        c0 = (corner % 2) * half
        prior[r0 : r0 + half, c0 : c0 + half] = 0.0
    prior /= prior.sum()
    cond = rng.dirichlet(np.ones(n_outcomes), size=(side, side))
    if n_outcomes == 2:
        outcomes = qb.OutcomeSpace(("free", "occupied"))
    else:
        outcomes = qb.OutcomeSpace(tuple(f"y{i}" for i in range(n_outcomes)))
    return qb.WorldModel.from_grids(prior, cond, outcomes)


def random_tree(rng, depth_limit, expansions=None):
    """Grow a random valid tree by a sequence of random nodal expansions."""
    tree = qb.root_tree(depth_limit)
    if depth_limit == 0:
        return tree
    if expansions is None:
        expansions = int(rng.integers(0, qb.tree_count(min(depth_limit, 2))))
    for _ in range(expansions):
        frontier = [n for n in qb.leaves(tree) if n.depth < depth_limit]
        if not frontier:
            break
        tree = qb.expand(tree, frontier[rng.integers(0, len(frontier))])
    return tree


def parse_ppm(data: bytes):
    """Minimal P6 reader returning an (h, w, 3) uint8 array."""
    assert data.startswith(b"P6\n")
    rest = data[3:]
    dims, rest = rest.split(b"\n", 1)
    w, h = map(int, dims.split())
    maxval, rest = rest.split(b"\n", 1)
    assert int(maxval) == 255
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w, 3)
