import numpy as np
import pytest

import quadib as qb
from quadib.sweep import CSV_HEADER

from helpers import make_random_world


class TestBetaSweepValidation:
    def test_empty_grid_rejected(self):
        rng = np.random.default_rng(0)
        world = make_random_world(rng, 1)
        with pytest.raises(ValueError, match="not be empty"):
            qb.beta_sweep(world, [])

    def test_non_increasing_grid_rejected(self):
        rng = np.random.default_rng(1)
        world = make_random_world(rng, 1)
        with pytest.raises(ValueError, match="strictly increasing"):
            qb.beta_sweep(world, [1.0, 1.0])

    def test_non_positive_beta_rejected(self):
        rng = np.random.default_rng(2)
        world = make_random_world(rng, 1)
        with pytest.raises(ValueError, match="positive"):
            qb.beta_sweep(world, [-1.0, 2.0])

    def test_unknown_algorithm_rejected(self):
        rng = np.random.default_rng(3)
        world = make_random_world(rng, 1)
        with pytest.raises(ValueError, match="unknown algorithms"):
            qb.beta_sweep(world, [1.0], algorithms=("simulated_annealing",))


class TestSweepPoints:
    def test_one_point_per_beta_and_algorithm(self):
        rng = np.random.default_rng(4)
        world = make_random_world(rng, 2)
        points = qb.beta_sweep(world, [0.5, 5.0, 50.0])
        assert len(points) == 6
        assert {(p.beta, p.algorithm) for p in points} == {
            (b, a) for b in (0.5, 5.0, 50.0) for a in ("greedy", "qtree")
        }

    def test_tiny_beta_collapses_to_one_leaf(self):
        rng = np.random.default_rng(5)
        world = make_random_world(rng, 2)
        points = qb.beta_sweep(world, [1e-6])
        for p in points:
            assert p.leaf_count == 1
            assert p.i_tx_bits == pytest.approx(0.0, abs=1e-12)
            assert p.i_ty_bits == pytest.approx(0.0, abs=1e-12)

    def test_huge_beta_recovers_nearly_all_relevance(self):
        occ = (np.arange(16).reshape(4, 4) + 0.5) / 16.5
        cond = np.stack([1 - occ, occ], axis=-1)
        world = qb.WorldModel.from_grids(np.full((4, 4), 1 / 16), cond)
        points = qb.beta_sweep(world, [1e9])
        for p in points:
            assert p.leaf_count == 16
            assert p.i_ty_bits / p.i_xy_bits >= 0.999

    def test_point_invariants(self):
        rng = np.random.default_rng(6)
        for seed in range(4):
            world = make_random_world(
                np.random.default_rng(seed), 3, zero_block=seed == 2
            )
            points = qb.beta_sweep(world, [0.1, 1.0, 10.0, 1000.0])
            for p in points:
                assert p.leaf_count % 3 == 1
                assert 1 <= p.leaf_count <= 64
                assert -1e-12 <= p.i_ty_bits <= p.i_xy_bits + 1e-12
                assert -1e-12 <= p.i_tx_bits <= p.h_x_bits + 1e-12

    def test_qtree_dominates_greedy_at_every_beta(self):
        rng = np.random.default_rng(7)
        for seed in range(4):
            world = make_random_world(np.random.default_rng(50 + seed), 3)
            points = qb.beta_sweep(world, [0.2, 2.0, 20.0, 2000.0])
            by_beta = {}
            for p in points:
                by_beta.setdefault(p.beta, {})[p.algorithm] = p
            for group in by_beta.values():
                assert (
                    group["qtree"].objective_bits
                    >= group["greedy"].objective_bits - 1e-12
                )

    def test_qtree_points_are_undominated_in_the_information_plane(self):
        # no enumerated tree with at most the point's compression carries
        # strictly more relevance
        for seed in range(3):
            world = make_random_world(np.random.default_rng(80 + seed), 2)
            points = qb.beta_sweep(world, [0.5, 5.0, 500.0], algorithms=("qtree",))
            plane = [
                qb.tree_information(t, world) for t in qb.enumerate_trees(2)
            ]
            for p in points:
                for i_tx, i_ty in plane:
                    if i_tx <= p.i_tx_bits + 1e-12:
                        assert i_ty <= p.i_ty_bits + 1e-9


class TestMetricsCsv:
    def test_empty_points_emit_header_only(self):
        assert qb.emit_metrics_csv([]) == CSV_HEADER + "\n"

    def test_single_root_point_has_zero_columns(self):
        rng = np.random.default_rng(8)
        world = make_random_world(rng, 2)
        text = qb.emit_metrics_csv(qb.beta_sweep(world, [1e-6], ("qtree",)))
        line = text.strip().split("\n")[1]
        beta, algo, leaves, i_tx, i_ty, obj, _, _ = line.split(",")
        assert (algo, leaves) == ("qtree", "1")
        # the node-sum objective is exactly zero; the measured informations
        # carry only float-normalization noise
        assert float(obj) == 0.0
        assert abs(float(i_tx)) < 1e-12 and abs(float(i_ty)) < 1e-12

    def test_rows_sorted_by_algorithm_then_beta(self):
        rng = np.random.default_rng(9)
        world = make_random_world(rng, 2)
        points = qb.beta_sweep(world, [5.0, 50.0])
        text = qb.emit_metrics_csv(points)
        rows = [line.split(",")[:2] for line in text.strip().split("\n")[1:]]
        assert rows == [
            ["5", "greedy"],
            ["50", "greedy"],
            ["5", "qtree"],
            ["50", "qtree"],
        ]

    def test_round_trip_is_identity_at_twelve_digits(self):
        rng = np.random.default_rng(10)
        world = make_random_world(rng, 3)
        points = qb.beta_sweep(world, [0.37, 7.1, 713.0])
        text = qb.emit_metrics_csv(points)
        parsed = qb.parse_metrics_csv(text)
        assert qb.emit_metrics_csv(parsed) == text
        for a, b in zip(sorted(points, key=lambda p: (p.algorithm, p.beta)), parsed):
            assert a.algorithm == b.algorithm
            assert a.leaf_count == b.leaf_count
            assert b.objective_bits == pytest.approx(a.objective_bits, rel=1e-11)

    def test_header_mismatch_rejected(self):
        with pytest.raises(qb.ParseError, match="header"):
            qb.parse_metrics_csv("nope\n1,2,3\n")

    def test_sweep_output_is_deterministic(self):
        rng = np.random.default_rng(11)
        world = make_random_world(rng, 3)
        first = qb.emit_metrics_csv(qb.beta_sweep(world, [1.0, 10.0, 100.0]))
        second = qb.emit_metrics_csv(qb.beta_sweep(world, [1.0, 10.0, 100.0]))
        assert first == second
