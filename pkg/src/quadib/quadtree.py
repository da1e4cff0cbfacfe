"""Addressing and manipulation of pruned quadtrees over a 2^L x 2^L grid.

A full quadtree of depth L has one node per aligned square block of the
grid; nodes are addressed by (depth, Morton index).  A pruned quadtree is
represented by the set of nodes that have been expanded (its interior
set); the leaf front is derived from it.  All values here are immutable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, NamedTuple


class NodeId(NamedTuple):
    depth: int
    index: int


ROOT = NodeId(0, 0)


def level_offset(depth: int) -> int:
    """Number of nodes strictly above `depth` (= global offset of (depth, 0))."""
    return ((1 << (2 * depth)) - 1) // 3


def total_nodes(depth_limit: int) -> int:
    return level_offset(depth_limit + 1)


def node_offset(node: NodeId) -> int:
    """Global index of a node in the depth-major, Morton-minor layout."""
    return level_offset(node.depth) + node.index


# -- Morton (Z-order) bit interleaving; row bits land on the odd positions
#    so that the four children of a block enumerate its quadrants row-major.

def _part1by1(v):
    v = (v | (v << 16)) & 0x0000FFFF0000FFFF
    v = (v | (v << 8)) & 0x00FF00FF00FF00FF
    v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0F
    v = (v | (v << 2)) & 0x3333333333333333
    v = (v | (v << 1)) & 0x5555555555555555
    return v


def _compact1by1(v):
    v = v & 0x5555555555555555
    v = (v | (v >> 1)) & 0x3333333333333333
    v = (v | (v >> 2)) & 0x0F0F0F0F0F0F0F0F
    v = (v | (v >> 4)) & 0x00FF00FF00FF00FF
    v = (v | (v >> 8)) & 0x0000FFFF0000FFFF
    v = (v | (v >> 16)) & 0x00000000FFFFFFFF
    return v


def morton_encode(row, col):
    """Z-order index of cell (row, col).  Accepts ints or integer ndarrays."""
    return (_part1by1(row) << 1) | _part1by1(col)


def morton_decode(code):
    """Inverse of morton_encode: code -> (row, col)."""
    return _compact1by1(code >> 1), _compact1by1(code)


@dataclass(frozen=True)
class CellRegion:
    """The square cell block covered by a node, in finest-grid units."""

    row0: int
    col0: int
    size: int


def cell_region(node: NodeId, depth_limit: int) -> CellRegion:
    if not 0 <= node.depth <= depth_limit:
        raise ValueError(f"node {node} outside depth limit {depth_limit}")
    if not 0 <= node.index < 1 << (2 * node.depth):
        raise ValueError(f"node {node} has out-of-range Morton index")
    size = 1 << (depth_limit - node.depth)
    row_block, col_block = morton_decode(node.index)
    return CellRegion(row_block * size, col_block * size, size)


def children(node: NodeId, depth_limit: int) -> list[NodeId]:
    """The four depth+1 nodes tiling `node`'s block, in Morton order."""
    if node.depth >= depth_limit:
        raise ValueError(
            f"node at depth {node.depth} has no children within depth limit {depth_limit}"
        )
    base = node.index << 2
    return [NodeId(node.depth + 1, base + q) for q in range(4)]


def parent(node: NodeId) -> NodeId | None:
    """The containing node one level up; None for the root."""
    if node.depth == 0:
        return None
    return NodeId(node.depth - 1, node.index >> 2)


@dataclass(frozen=True)
class TreeAbstraction:
    """A valid pruned quadtree, represented by its interior-node set.

    Validity is a single closure invariant: every non-root interior node's
    parent is interior too.  Leaves are derived (children of interior nodes
    that are not interior themselves; the bare root if nothing is expanded)
    and always tile the grid exactly once.
    """

    depth_limit: int
    interior: frozenset[NodeId]

    def __post_init__(self):
        if self.depth_limit < 0:
            raise ValueError("depth_limit must be non-negative")
        object.__setattr__(
            self, "interior", frozenset(NodeId(*n) for n in self.interior)
        )
        for node in self.interior:
            if not 0 <= node.depth < self.depth_limit:
                raise ValueError(
                    f"interior node {node} cannot be expanded within depth limit "
                    f"{self.depth_limit}"
                )
            if not 0 <= node.index < 1 << (2 * node.depth):
                raise ValueError(f"interior node {node} has out-of-range Morton index")
            up = parent(node)
            if up is not None and up not in self.interior:
                raise ValueError(
                    f"interior set is not parent-closed: {node} present, {up} missing"
                )

    @property
    def leaf_count(self) -> int:
        return 3 * len(self.interior) + 1


def root_tree(depth_limit: int) -> TreeAbstraction:
    """The fully abstracted tree: a single leaf covering the whole grid."""
    return TreeAbstraction(depth_limit, frozenset())


def expand(tree: TreeAbstraction, leaf: NodeId) -> TreeAbstraction:
    """Replace `leaf` by its four children (a nodal expansion).

    The result is the neighbor tree of higher leaf cardinality; its leaf
    count exceeds the input's by exactly 3.
    """
    leaf = NodeId(*leaf)
    if leaf in tree.interior:
        raise ValueError(f"{leaf} is already expanded")
    if leaf.depth >= tree.depth_limit:
        raise ValueError(f"{leaf} is at the depth limit and cannot be expanded")
    up = parent(leaf)
    if up is not None and up not in tree.interior:
        raise ValueError(f"{leaf} is not a leaf of the tree")
    return TreeAbstraction(tree.depth_limit, tree.interior | {leaf})


def is_subtree(a: TreeAbstraction, b: TreeAbstraction) -> bool:
    """True iff `a` can be grown into `b` by nodal expansions alone."""
    if a.depth_limit != b.depth_limit:
        raise ValueError(
            f"depth limits differ: {a.depth_limit} vs {b.depth_limit}"
        )
    return a.interior <= b.interior


def leaves(tree: TreeAbstraction) -> list[NodeId]:
    """Leaf front in Morton-then-depth order; blocks partition the grid."""
    if not tree.interior:
        return [ROOT]
    out = [
        child
        for node in tree.interior
        for child in children(node, tree.depth_limit)
        if child not in tree.interior
    ]
    limit = tree.depth_limit
    out.sort(key=lambda n: (n.index << (2 * (limit - n.depth)), n.depth))
    return out


def tree_nodes(tree: TreeAbstraction) -> frozenset[NodeId]:
    """All nodes of the pruned tree: interior plus derived leaves."""
    return tree.interior | frozenset(leaves(tree))


def subtree_rooted_at(tree: TreeAbstraction, node: NodeId) -> frozenset[NodeId]:
    """`node` plus every descendant of it present in the tree."""
    node = NodeId(*node)
    if node not in tree_nodes(tree):
        raise ValueError(f"{node} is not a node of the tree")
    out = {node}
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur in tree.interior:
            for child in children(cur, tree.depth_limit):
                out.add(child)
                stack.append(child)
    return frozenset(out)


def leaf_spans(tree: TreeAbstraction) -> list[tuple[NodeId, int, int]]:
    """Per leaf, its half-open range of finest-cell Morton indices.

    Spans come back in leaf order and tile [0, 4^depth_limit) contiguously,
    which makes building the cell -> leaf encoder a single pass.
    """
    limit = tree.depth_limit
    out = []
    for leaf in leaves(tree):
        width = 1 << (2 * (limit - leaf.depth))
        start = leaf.index * width
        out.append((leaf, start, start + width))
    return out


MAX_ENUMERATION_DEPTH = 3


def tree_count(depth_limit: int) -> int:
    """Number of valid pruned quadtrees: f(0)=1, f(d)=1+f(d-1)^4."""
    count = 1
    for _ in range(depth_limit):
        count = 1 + count**4
    return count


def _interior_sets(node: NodeId, depth_limit: int) -> Iterator[frozenset[NodeId]]:
    yield frozenset()
    if node.depth < depth_limit:
        options = [
            tuple(_interior_sets(child, depth_limit))
            for child in children(node, depth_limit)
        ]
        for combo in itertools.product(*options):
            merged = {node}
            for part in combo:
                merged.update(part)
            yield frozenset(merged)


def enumerate_trees(depth_limit: int) -> Iterator[TreeAbstraction]:
    """Yield every valid pruned quadtree exactly once (small depths only).

    Refused above depth 3: the count grows as f(d) = 1 + f(d-1)^4, so
    f(3) = 83522 is tractable while f(4) is ~4.9e19.
    """
    if depth_limit < 0:
        raise ValueError("depth_limit must be non-negative")
    if depth_limit > MAX_ENUMERATION_DEPTH:
        raise ValueError(
            f"refusing to enumerate depth {depth_limit}: tree count f(d)=1+f(d-1)^4 "
            f"reaches {tree_count(depth_limit):.3g} trees; depth <= "
            f"{MAX_ENUMERATION_DEPTH} is supported"
        )
    for interior in _interior_sets(ROOT, depth_limit):
        yield TreeAbstraction(depth_limit, interior)


def tree_to_json(tree: TreeAbstraction) -> dict:
    """Plain-JSON form of a tree: depth limit plus the ordered leaf front."""
    entries = []
    for leaf in leaves(tree):
        region = cell_region(leaf, tree.depth_limit)
        entries.append(
            {
                "depth": leaf.depth,
                "morton": leaf.index,
                "row": region.row0,
                "col": region.col0,
                "size": region.size,
            }
        )
    return {"depth_limit": tree.depth_limit, "leaves": entries}


def tree_from_json(doc: dict) -> TreeAbstraction:
    """Rebuild a tree from its JSON form, validating the leaf tiling."""
    try:
        depth_limit = int(doc["depth_limit"])
        listed = [NodeId(int(e["depth"]), int(e["morton"])) for e in doc["leaves"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed tree document: {exc}") from exc
    interior: set[NodeId] = set()
    for leaf in listed:
        up = parent(leaf)
        while up is not None and up not in interior:
            interior.add(up)
            up = parent(up)
    tree = TreeAbstraction(depth_limit, frozenset(interior))
    if set(leaves(tree)) != set(listed):
        raise ValueError("leaf list does not describe a valid quadtree tiling")
    return tree
