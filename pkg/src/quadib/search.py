"""Abstraction search: greedy expansion, Q-tree search, and a brute-force oracle.

Both algorithms grow a pruned quadtree from a start tree by repeatedly
expanding the most promising leaf.  Greedy scores a leaf by its own
expansion gain and stops at the first step with no strictly positive
option; Q-tree search scores it by a bottom-up value that folds in the best
achievable gain of the whole subtree below, so it digs through locally poor
expansions that pay off deeper down.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import info, quadtree
from .info import NodeStatsTable, expansion_gain_table
from .quadtree import NodeId, TreeAbstraction, level_offset, node_offset
from .world import WorldModel


@dataclass(frozen=True, eq=False)
class QTable:
    """Per-node search values at one beta: the clipped best-case subtree gain."""

    depth: int
    beta: float
    q: np.ndarray  # (total_nodes,), >= 0 everywhere, 0 on the finest level


@dataclass(frozen=True)
class SearchResult:
    tree: TreeAbstraction
    objective: float
    expansions: tuple[NodeId, ...]
    iterations: int
    beta: float
    algorithm: str


def compute_q_table(stats: NodeStatsTable, beta: float) -> QTable:
    """One bottom-up pass: q(t) = max(gain(t) + sum q(children), 0).

    Finest-level nodes get exactly 0.  A positive value certifies that some
    sequence of expansions inside t's subtree has positive total gain.
    """
    gains = expansion_gain_table(stats, beta)
    q = np.zeros_like(gains)
    for k in range(stats.depth - 1, -1, -1):
        lo, hi = level_offset(k), level_offset(k + 1)
        child_sum = q[hi : hi + 4 * (hi - lo)].reshape(-1, 4).sum(axis=1)
        q[lo:hi] = np.maximum(gains[lo:hi] + child_sum, 0.0)
    q.setflags(write=False)
    return QTable(depth=stats.depth, beta=float(beta), q=q)


def _check_start(start: TreeAbstraction | None, depth: int) -> TreeAbstraction:
    if start is None:
        return quadtree.root_tree(depth)
    if start.depth_limit != depth:
        raise ValueError(
            f"start tree depth limit {start.depth_limit} does not match depth {depth}"
        )
    return start


def _expand_by_scores(
    scores: np.ndarray,
    start: TreeAbstraction,
    depth_limit: int,
    epsilon: float,
) -> tuple[set[NodeId], list[NodeId]]:
    """Expand the max-score leaf while the max exceeds epsilon.

    Scores are per-node constants, so a max-heap over the current leaf
    front replays exactly the scan-all-leaves loop, ties broken by smallest
    (depth, Morton).
    """
    interior = set(start.interior)
    heap = [
        (-scores[node_offset(leaf)], leaf.depth, leaf.index)
        for leaf in quadtree.leaves(start)
        if leaf.depth < depth_limit
    ]
    heapq.heapify(heap)
    expansions: list[NodeId] = []
    while heap:
        neg_score, depth, index = heapq.heappop(heap)
        if -neg_score <= epsilon:
            break
        node = NodeId(depth, index)
        interior.add(node)
        expansions.append(node)
        if depth + 1 < depth_limit:
            base = index << 2
            for q in range(4):
                child = level_offset(depth + 1) + base + q
                heapq.heappush(heap, (-scores[child], depth + 1, base + q))
    return interior, expansions


def _interior_objective(
    interior: set[NodeId], stats: NodeStatsTable, beta: float
) -> float:
    if not interior:
        return 0.0
    gains = expansion_gain_table(stats, beta)
    return math.fsum(gains[node_offset(t)] for t in sorted(interior))


def greedy_search(
    stats: NodeStatsTable,
    beta: float,
    start: TreeAbstraction | None = None,
    positivity_epsilon: float = 0.0,
) -> SearchResult:
    """Myopic search: expand the best-gain leaf while the best gain is > 0.

    Fast and simple, but it cannot see gains hiding below a losing
    expansion, so it may stop short of the optimum at finite beta.
    """
    start = _check_start(start, stats.depth)
    gains = expansion_gain_table(stats, beta)
    interior, expansions = _expand_by_scores(
        gains, start, stats.depth, positivity_epsilon
    )
    return SearchResult(
        tree=TreeAbstraction(stats.depth, frozenset(interior)),
        objective=_interior_objective(interior, stats, beta),
        expansions=tuple(expansions),
        iterations=len(expansions),
        beta=float(beta),
        algorithm="greedy",
    )


def positive_q_closure(
    qtable: QTable,
    start: TreeAbstraction | None = None,
    positivity_epsilon: float = 0.0,
) -> frozenset[NodeId]:
    """Closed form of the Q-tree search result: grow every reachable node
    with positive value from the start tree's leaf front."""
    start = _check_start(start, qtable.depth)
    interior = set(start.interior)
    stack = [
        leaf for leaf in quadtree.leaves(start) if leaf.depth < qtable.depth
    ]
    while stack:
        node = stack.pop()
        if qtable.q[node_offset(node)] > positivity_epsilon:
            interior.add(node)
            if node.depth + 1 < qtable.depth:
                stack.extend(quadtree.children(node, qtable.depth))
    return frozenset(interior)


def qtree_search(
    stats: NodeStatsTable,
    qtable: QTable,
    beta: float,
    start: TreeAbstraction | None = None,
    positivity_epsilon: float = 0.0,
) -> SearchResult:
    """Expand the leaf of maximal q-value while that maximum is > 0.

    Returns the minimal optimal tree reachable from `start`.  On small
    worlds the iterative loop is cross-checked against the closed-form
    positive closure; the two always agree because the per-step argmax
    never changes which nodes have positive value.
    """
    beta = float(beta)
    if qtable.beta != beta:
        raise ValueError(
            f"q-table was built for beta={qtable.beta!r}, not beta={beta!r}"
        )
    if qtable.depth != stats.depth:
        raise ValueError(
            f"q-table depth {qtable.depth} does not match stats depth {stats.depth}"
        )
    start = _check_start(start, stats.depth)
    interior, expansions = _expand_by_scores(
        qtable.q, start, stats.depth, positivity_epsilon
    )
    if stats.depth <= 3:
        closure = positive_q_closure(qtable, start, positivity_epsilon)
        if closure != frozenset(interior):
            raise AssertionError(
                "iterative q-tree search and its closed form disagree"
            )
    return SearchResult(
        tree=TreeAbstraction(stats.depth, frozenset(interior)),
        objective=_interior_objective(interior, stats, beta),
        expansions=tuple(expansions),
        iterations=len(expansions),
        beta=beta,
        algorithm="qtree",
    )


MAX_BRUTE_FORCE_DEPTH = quadtree.MAX_ENUMERATION_DEPTH


@lru_cache(maxsize=None)
def _enumeration_arrays(depth: int):
    """All trees of a depth as sorted global-offset tuples plus flat index
    arrays for vectorized objective evaluation."""
    trees = tuple(
        tuple(sorted(node_offset(node) for node in tree.interior))
        for tree in quadtree.enumerate_trees(depth)
    )
    sizes = np.array([len(t) for t in trees])
    tree_ids = np.repeat(np.arange(len(trees)), sizes)
    flat = np.fromiter(itertools.chain.from_iterable(trees), dtype=np.int64)
    return trees, tree_ids, flat


def brute_force_optimum(
    world: WorldModel, beta: float
) -> tuple[TreeAbstraction, float]:
    """Exact optimum by exhaustive enumeration (depth <= 3 only).

    Among objective ties, prefers fewest interior nodes, then the smallest
    interior set in (depth, Morton) lexicographic order, i.e. a minimal
    optimal tree.
    """
    if world.depth > MAX_BRUTE_FORCE_DEPTH:
        raise ValueError(
            f"brute force refused at depth {world.depth}: enumeration is only "
            f"tractable up to depth {MAX_BRUTE_FORCE_DEPTH}"
        )
    stats = info.compute_node_stats(world)
    gains = expansion_gain_table(stats, beta)
    trees, tree_ids, flat = _enumeration_arrays(world.depth)
    objectives = np.zeros(len(trees))
    np.add.at(objectives, tree_ids, gains[flat])
    best_value = objectives.max()
    candidates = np.flatnonzero(objectives == best_value)
    best = min(candidates, key=lambda i: (len(trees[i]), trees[i]))
    interior = frozenset(_node_from_offset(g) for g in trees[best])
    return TreeAbstraction(world.depth, interior), float(objectives[best])


def _node_from_offset(offset: int) -> NodeId:
    depth = 0
    while level_offset(depth + 1) <= offset:
        depth += 1
    return NodeId(depth, offset - level_offset(depth))
