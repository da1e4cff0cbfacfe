import numpy as np
import pytest

import quadib as qb
from quadib.quadtree import NodeId, morton_decode, morton_encode

from helpers import random_tree


class TestNodeArithmetic:
    def test_children_of_root(self):
        assert qb.children(NodeId(0, 0), 1) == [
            NodeId(1, 0),
            NodeId(1, 1),
            NodeId(1, 2),
            NodeId(1, 3),
        ]

    def test_children_index_is_four_parent_plus_quadrant(self):
        assert qb.children(NodeId(1, 2), 2) == [
            NodeId(2, 8),
            NodeId(2, 9),
            NodeId(2, 10),
            NodeId(2, 11),
        ]

    def test_children_invert_parent(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            depth = int(rng.integers(0, 6))
            index = int(rng.integers(0, 4**depth))
            node = NodeId(depth, index)
            for child in qb.children(node, depth + 1):
                assert qb.parent(child) == node

    def test_children_at_depth_limit_refused(self):
        with pytest.raises(ValueError, match="no children"):
            qb.children(NodeId(2, 3), 2)

    def test_parent_examples(self):
        assert qb.parent(NodeId(2, 11)) == NodeId(1, 2)
        assert qb.parent(NodeId(0, 0)) is None
        assert qb.parent(NodeId(1, 3)) == NodeId(0, 0)

    def test_morton_round_trip(self):
        rng = np.random.default_rng(1)
        rows = rng.integers(0, 1 << 12, size=200)
        cols = rng.integers(0, 1 << 12, size=200)
        codes = morton_encode(rows, cols)
        back_rows, back_cols = morton_decode(codes)
        np.testing.assert_array_equal(back_rows, rows)
        np.testing.assert_array_equal(back_cols, cols)

    def test_children_cover_parent_block_in_row_major_quadrants(self):
        region = qb.cell_region(NodeId(1, 2), 3)
        # quadrant 2 of the root is the bottom-left block
        assert (region.row0, region.col0, region.size) == (4, 0, 4)
        kids = [qb.cell_region(c, 3) for c in qb.children(NodeId(1, 2), 3)]
        assert [(r.row0, r.col0) for r in kids] == [(4, 0), (4, 2), (6, 0), (6, 2)]


class TestTreeAbstraction:
    def test_root_tree_has_one_leaf(self):
        tree = qb.root_tree(3)
        assert qb.leaves(tree) == [NodeId(0, 0)]
        assert tree.leaf_count == 1

    def test_parent_closure_enforced(self):
        with pytest.raises(ValueError, match="parent-closed"):
            qb.TreeAbstraction(2, frozenset({NodeId(1, 0)}))

    def test_interior_cannot_sit_at_depth_limit(self):
        with pytest.raises(ValueError, match="cannot be expanded"):
            qb.TreeAbstraction(1, frozenset({NodeId(0, 0), NodeId(1, 0)}))

    def test_expand_root(self):
        tree = qb.expand(qb.root_tree(2), NodeId(0, 0))
        assert qb.leaves(tree) == [NodeId(1, q) for q in range(4)]

    def test_expand_increases_leaf_count_by_three(self):
        rng = np.random.default_rng(2)
        tree = qb.root_tree(3)
        for _ in range(20):
            frontier = [n for n in qb.leaves(tree) if n.depth < 3]
            if not frontier:
                break
            leaf = frontier[rng.integers(0, len(frontier))]
            grown = qb.expand(tree, leaf)
            assert grown.leaf_count == tree.leaf_count + 3
            assert qb.is_subtree(tree, grown)
            # neighbors: the grown tree's interior differs by exactly the leaf
            assert grown.interior - tree.interior == {leaf}
            tree = grown

    def test_expand_rejects_interior_and_too_deep_nodes(self):
        tree = qb.expand(qb.root_tree(2), NodeId(0, 0))
        with pytest.raises(ValueError, match="already expanded"):
            qb.expand(tree, NodeId(0, 0))
        with pytest.raises(ValueError, match="depth limit"):
            qb.expand(tree, NodeId(2, 0))
        with pytest.raises(ValueError, match="not a leaf"):
            qb.expand(qb.root_tree(2), NodeId(1, 2))

    def test_expanding_all_depth_one_leaves_gives_full_tree(self):
        tree = qb.expand(qb.root_tree(1), NodeId(0, 0))
        assert set(qb.leaves(tree)) == {NodeId(1, q) for q in range(4)}
        assert tree.leaf_count == 4

    def test_is_subtree(self):
        root = qb.root_tree(2)
        one = qb.expand(root, NodeId(0, 0))
        two = qb.expand(one, NodeId(1, 1))
        assert qb.is_subtree(root, two)
        assert qb.is_subtree(two, two)
        assert not qb.is_subtree(two, one)
        with pytest.raises(ValueError, match="depth limits differ"):
            qb.is_subtree(qb.root_tree(1), qb.root_tree(2))

    def test_leaf_front_shape_with_two_expanded_quadrants(self):
        tree = qb.TreeAbstraction(
            2, frozenset({NodeId(0, 0), NodeId(1, 0), NodeId(1, 3)})
        )
        front = qb.leaves(tree)
        assert len(front) == 10
        assert [n.depth for n in front] == [2, 2, 2, 2, 1, 1, 2, 2, 2, 2]

    def test_full_depth_two_tree_has_sixteen_leaves(self):
        interior = {NodeId(0, 0)} | {NodeId(1, q) for q in range(4)}
        tree = qb.TreeAbstraction(2, frozenset(interior))
        front = qb.leaves(tree)
        assert len(front) == 16
        assert all(n.depth == 2 for n in front)

    def test_leaf_blocks_tile_the_grid(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            depth = int(rng.integers(1, 4))
            tree = random_tree(rng, depth, expansions=int(rng.integers(0, 8)))
            side = 1 << depth
            cover = np.zeros((side, side), dtype=int)
            for leaf in qb.leaves(tree):
                region = qb.cell_region(leaf, depth)
                cover[
                    region.row0 : region.row0 + region.size,
                    region.col0 : region.col0 + region.size,
                ] += 1
            np.testing.assert_array_equal(cover, np.ones((side, side), dtype=int))

    def test_leaf_spans_tile_the_morton_axis(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            depth = int(rng.integers(1, 4))
            tree = random_tree(rng, depth, expansions=int(rng.integers(0, 8)))
            spans = qb.leaf_spans(tree)
            cursor = 0
            for _, start, stop in spans:
                assert start == cursor
                cursor = stop
            assert cursor == 4**depth


class TestSubtreeRootedAt:
    def test_leaf_gives_singleton(self):
        tree = qb.expand(qb.root_tree(2), NodeId(0, 0))
        assert qb.subtree_rooted_at(tree, NodeId(1, 2)) == {NodeId(1, 2)}

    def test_root_gives_all_nodes(self):
        tree = qb.expand(qb.root_tree(2), NodeId(0, 0))
        assert qb.subtree_rooted_at(tree, NodeId(0, 0)) == qb.tree_nodes(tree)

    def test_two_level_black_subtree(self):
        interior = {NodeId(0, 0), NodeId(1, 0), NodeId(2, 0), NodeId(2, 3)}
        tree = qb.TreeAbstraction(3, frozenset(interior))
        sub = qb.subtree_rooted_at(tree, NodeId(1, 0))
        expected = (
            {NodeId(1, 0)}
            | {NodeId(2, q) for q in range(4)}
            | {NodeId(3, q) for q in range(4)}
            | {NodeId(3, 12 + q) for q in range(4)}
        )
        assert sub == expected

    def test_foreign_node_rejected(self):
        tree = qb.root_tree(2)
        with pytest.raises(ValueError, match="not a node"):
            qb.subtree_rooted_at(tree, NodeId(1, 0))


class TestEnumeration:
    def test_counts_follow_recurrence(self):
        assert qb.tree_count(0) == 1
        assert qb.tree_count(1) == 2
        assert qb.tree_count(2) == 17
        assert qb.tree_count(3) == 83522
        assert len(list(qb.enumerate_trees(1))) == 2
        assert len(list(qb.enumerate_trees(2))) == 17

    def test_depth_three_count_and_uniqueness(self):
        seen = set()
        for tree in qb.enumerate_trees(3):
            seen.add(tree.interior)
        assert len(seen) == 83522

    def test_depth_two_trees_are_unique_and_valid(self):
        trees = list(qb.enumerate_trees(2))
        assert len({t.interior for t in trees}) == 17
        for tree in trees:
            front = qb.leaves(tree)
            assert len(front) == tree.leaf_count

    def test_depth_zero(self):
        assert [t.interior for t in qb.enumerate_trees(0)] == [frozenset()]

    def test_depth_four_refused(self):
        with pytest.raises(ValueError, match="refusing to enumerate"):
            next(qb.enumerate_trees(4))


class TestTreeJson:
    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            tree = random_tree(rng, 3, expansions=int(rng.integers(0, 10)))
            doc = qb.tree_to_json(tree)
            assert doc["depth_limit"] == 3
            assert len(doc["leaves"]) == tree.leaf_count
            assert qb.tree_from_json(doc) == tree

    def test_geometry_fields_match_cell_region(self):
        tree = qb.expand(qb.root_tree(2), NodeId(0, 0))
        doc = qb.tree_to_json(tree)
        for entry in doc["leaves"]:
            region = qb.cell_region(
                NodeId(entry["depth"], entry["morton"]), doc["depth_limit"]
            )
            assert (entry["row"], entry["col"], entry["size"]) == (
                region.row0,
                region.col0,
                region.size,
            )

    def test_bad_leaf_list_rejected(self):
        doc = {
            "depth_limit": 1,
            "leaves": [{"depth": 1, "morton": 0}, {"depth": 1, "morton": 1}],
        }
        with pytest.raises(ValueError, match="tiling"):
            qb.tree_from_json(doc)
