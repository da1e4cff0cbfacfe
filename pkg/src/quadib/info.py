"""Information-theoretic kernels and per-node statistics.

All quantities are in bits (base-2 logs) with the 0*log(0) = 0 convention.
Node statistics are computed once per world in a single bottom-up pass and
are independent of the trade-off weight beta; only the per-node expansion
gains and everything built on them depend on beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadtree
from .quadtree import NodeId, TreeAbstraction, level_offset, node_offset
from .world import OutcomeSpace, WorldModel


def _as_dist(p, name: str = "distribution") -> np.ndarray:
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if np.any(p < 0) or np.any(~np.isfinite(p)):
        raise ValueError(f"{name} must be finite and non-negative")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError(f"{name} must sum to 1 (got {float(p.sum())!r})")
    return p


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be a positive finite number, got {beta!r}")
    return beta


def entropy(p) -> float:
    """Shannon entropy -sum p log2 p in bits."""
    p = _as_dist(p)
    mask = p > 0
    return float(-np.sum(p[mask] * np.log2(p[mask])) + 0.0)


def kl_divergence(mu, nu) -> float:
    """KL divergence sum mu log2(mu/nu) in bits; requires nu > 0 on mu's support."""
    mu = _as_dist(mu, "mu")
    nu = _as_dist(nu, "nu")
    if mu.shape != nu.shape:
        raise ValueError("mu and nu must share an outcome set")
    mask = mu > 0
    if np.any(nu[mask] <= 0):
        raise ValueError("nu must be positive wherever mu is")
    return float(np.sum(mu[mask] * np.log2(mu[mask] / nu[mask])))


def js_divergence(weights, dists) -> float:
    """Weighted Jensen-Shannon divergence in bits.

    Computes sum_s w_s KL(p_s, pbar) against the mixture pbar = sum_s w_s p_s;
    zero-weight components are ignored.  The value lies in [0, H(weights)].
    """
    weights = _as_dist(weights, "weights")
    dists = np.asarray(dists, dtype=np.float64)
    if dists.ndim != 2 or dists.shape[0] != weights.shape[0]:
        raise ValueError("need one distribution per weight")
    for s in range(dists.shape[0]):
        _as_dist(dists[s], f"dists[{s}]")
    mixture = weights @ dists
    total = 0.0
    for s in range(dists.shape[0]):
        if weights[s] > 0:
            total += weights[s] * kl_divergence(dists[s], mixture)
    return float(total)


def mutual_information(joint) -> float:
    """Mutual information of a joint probability matrix, in bits."""
    joint = np.asarray(joint, dtype=np.float64)
    if joint.ndim != 2:
        raise ValueError("joint must be a 2-D matrix")
    if np.any(joint < 0) or np.any(~np.isfinite(joint)):
        raise ValueError("joint must be finite and non-negative")
    if abs(float(joint.sum()) - 1.0) > 1e-9:
        raise ValueError("joint must sum to 1")
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    denom = pa[:, None] * pb[None, :]
    mask = joint > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(mask, joint * np.log2(joint / denom), 0.0)
    return float(np.sum(terms))


@dataclass(frozen=True, eq=False)
class NodeStatsTable:
    """Per-node mass p(t) and conditional p(y|t) over the whole full tree.

    Arrays are laid out depth-major / Morton-minor (see quadtree.node_offset).
    Zero-mass nodes are flagged invalid and carry a uniform placeholder
    conditional that nothing downstream ever weights.
    """

    depth: int
    outcomes: OutcomeSpace
    mass: np.ndarray  # (total_nodes,)
    cond: np.ndarray  # (total_nodes, n_outcomes)
    valid: np.ndarray  # (total_nodes,) bool

    @property
    def side(self) -> int:
        return 1 << self.depth

    def node_mass(self, node: NodeId) -> float:
        return float(self.mass[node_offset(node)])

    def node_cond(self, node: NodeId) -> np.ndarray:
        return self.cond[node_offset(node)]


def _morton_order(world: WorldModel) -> tuple[np.ndarray, np.ndarray]:
    """World prior/cond flattened into finest-level Morton cell order."""
    side = world.side
    rows, cols = np.indices((side, side))
    codes = quadtree.morton_encode(rows.astype(np.int64), cols.astype(np.int64))
    prior_m = np.empty(side * side)
    prior_m[codes.ravel()] = world.prior.ravel()
    cond_m = np.empty((side * side, world.outcomes.size))
    cond_m[codes.ravel()] = world.cond.reshape(-1, world.outcomes.size)
    return prior_m, cond_m


def compute_node_stats(world: WorldModel) -> NodeStatsTable:
    """Single bottom-up aggregation pass over the full tree.

    Finest nodes take p(x) and p(y|x) directly; every interior node's mass
    is the sum of its children's and its conditional is their mass-weighted
    mixture.
    """
    depth = world.depth
    n_out = world.outcomes.size
    total = quadtree.total_nodes(depth)
    mass = np.zeros(total)
    cond = np.full((total, n_out), 1.0 / n_out)
    prior_m, cond_m = _morton_order(world)
    base = level_offset(depth)
    mass[base:] = prior_m
    cond[base:] = cond_m
    for k in range(depth - 1, -1, -1):
        lo, hi = level_offset(k), level_offset(k + 1)
        child_mass = mass[hi : hi + 4 * (hi - lo)].reshape(-1, 4)
        child_cond = cond[hi : hi + 4 * (hi - lo)].reshape(-1, 4, n_out)
        parent_mass = child_mass.sum(axis=1)
        weighted = (child_mass[:, :, None] * child_cond).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            mixed = np.where(
                parent_mass[:, None] > 0,
                weighted / parent_mass[:, None],
                1.0 / n_out,
            )
        mass[lo:hi] = parent_mass
        cond[lo:hi] = mixed
    valid = mass > 0
    for arr in (mass, cond, valid):
        arr.setflags(write=False)
    return NodeStatsTable(
        depth=depth, outcomes=world.outcomes, mass=mass, cond=cond, valid=valid
    )


def expansion_gain_table(stats: NodeStatsTable, beta: float) -> np.ndarray:
    """Objective change from expanding each node, for the whole full tree.

    Entry t holds p(t) * [JS(children | weights) - H(weights) / beta] with
    child weights p(child)/p(t); finest nodes and zero-mass nodes are
    exactly 0, and zero-mass children drop out of both terms.
    """
    beta = _check_beta(beta)
    n_out = stats.outcomes.size
    out = np.zeros(stats.mass.shape[0])
    for k in range(stats.depth):
        lo, hi = level_offset(k), level_offset(k + 1)
        parent_mass = stats.mass[lo:hi]
        child_mass = stats.mass[hi : hi + 4 * (hi - lo)].reshape(-1, 4)
        child_cond = stats.cond[hi : hi + 4 * (hi - lo)].reshape(-1, 4, n_out)
        mixture = stats.cond[lo:hi]
        with np.errstate(divide="ignore", invalid="ignore"):
            pi = np.where(parent_mass[:, None] > 0, child_mass / parent_mass[:, None], 0.0)
            ratio = child_cond / mixture[:, None, :]
            kl_terms = np.where(child_cond > 0, child_cond * np.log2(ratio), 0.0)
            kl = kl_terms.sum(axis=2)
            js = np.sum(np.where(pi > 0, pi * kl, 0.0), axis=1)
            weight_entropy = -np.sum(np.where(pi > 0, pi * np.log2(pi), 0.0), axis=1)
        out[lo:hi] = np.where(
            parent_mass > 0, parent_mass * (js - weight_entropy / beta), 0.0
        )
    return out


def expansion_gain(node: NodeId, stats: NodeStatsTable, beta: float) -> float:
    """Objective change from expanding one node; 0 for finest or zero-mass nodes.

    The value depends only on the node's own subtree statistics, never on
    the surrounding tree, so it can be tabulated once per beta.
    """
    beta = _check_beta(beta)
    node = NodeId(*node)
    if not 0 <= node.depth <= stats.depth:
        raise ValueError(f"node {node} outside depth limit {stats.depth}")
    if not 0 <= node.index < 1 << (2 * node.depth):
        raise ValueError(f"node {node} has out-of-range Morton index")
    if node.depth == stats.depth:
        return 0.0
    parent_mass = stats.mass[node_offset(node)]
    if parent_mass == 0.0:
        return 0.0
    child_offsets = [node_offset(c) for c in quadtree.children(node, stats.depth)]
    child_mass = stats.mass[child_offsets]
    child_cond = stats.cond[child_offsets]
    mixture = stats.cond[node_offset(node)]
    pi = child_mass / parent_mass
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = child_cond / mixture[None, :]
        kl_terms = np.where(child_cond > 0, child_cond * np.log2(ratio), 0.0)
        kl = kl_terms.sum(axis=1)
        js = np.sum(np.where(pi > 0, pi * kl, 0.0))
        weight_entropy = -np.sum(np.where(pi > 0, pi * np.log2(pi), 0.0))
    return float(parent_mass * (js - weight_entropy / beta))


def tree_objective(tree: TreeAbstraction, stats: NodeStatsTable, beta: float) -> float:
    """Tree objective as the sum of expansion gains over interior nodes.

    Exactly 0.0 for the fully abstracted (single-leaf) tree.  Summation is
    compensated so deep trees keep full double precision.
    """
    beta = _check_beta(beta)
    if tree.depth_limit != stats.depth:
        raise ValueError(
            f"tree depth limit {tree.depth_limit} does not match stats depth {stats.depth}"
        )
    if not tree.interior:
        return 0.0
    table = expansion_gain_table(stats, beta)
    return math.fsum(table[node_offset(t)] for t in sorted(tree.interior))


def _encoder_informations(
    tree: TreeAbstraction, world: WorldModel
) -> tuple[float, float, float]:
    """(I(T;X), H(T), I(T;Y)) under the tree's deterministic cell encoder."""
    if tree.depth_limit != world.depth:
        raise ValueError(
            f"tree depth limit {tree.depth_limit} does not match world depth {world.depth}"
        )
    prior_m, cond_m = _morton_order(world)
    spans = quadtree.leaf_spans(tree)
    starts = np.array([start for _, start, _ in spans])
    sizes = np.array([stop - start for _, start, stop in spans])
    masses = np.add.reduceat(prior_m, starts)
    joint_ty = np.add.reduceat(prior_m[:, None] * cond_m, starts, axis=0)
    positive = masses > 0
    h_t = float(-np.sum(masses[positive] * np.log2(masses[positive])) + 0.0)
    leaf_of_cell = np.repeat(np.arange(len(spans)), sizes)
    cell_mask = prior_m > 0
    # p(t,x) = p(x) on the encoder's graph, so each cell contributes
    # p(x) log2(1 / p(leaf(x))) to I(T;X).
    safe_mass = np.where(cell_mask, masses[leaf_of_cell], 1.0)
    i_tx = float(-np.sum(np.where(cell_mask, prior_m * np.log2(safe_mass), 0.0)) + 0.0)
    i_ty = mutual_information(joint_ty)
    return i_tx, h_t, i_ty


def tree_objective_direct(
    tree: TreeAbstraction, world: WorldModel, beta: float
) -> float:
    """Tree objective evaluated from first principles: I(T;Y) - I(T;X)/beta.

    Builds the deterministic encoder cell -> leaf and the induced joints.
    The encoder being deterministic forces I(T;X) = H(T); that identity is
    checked to 1e-12 on every call.
    """
    beta = _check_beta(beta)
    i_tx, h_t, i_ty = _encoder_informations(tree, world)
    if abs(i_tx - h_t) > 1e-12:
        raise AssertionError(
            f"deterministic encoder violated I(T;X) = H(T): {i_tx!r} vs {h_t!r}"
        )
    return i_ty - i_tx / beta


def tree_information(tree: TreeAbstraction, world: WorldModel) -> tuple[float, float]:
    """(I(T;X), I(T;Y)) under the tree's deterministic encoder."""
    i_tx, _, i_ty = _encoder_informations(tree, world)
    return i_tx, i_ty


def world_information(world: WorldModel) -> tuple[float, float]:
    """(H(X), I(X;Y)) of the finest model; the sweep's normalizing constants."""
    h_x = entropy(world.prior.ravel())
    joint = world.prior.reshape(-1, 1) * world.cond.reshape(-1, world.outcomes.size)
    i_xy = mutual_information(joint)
    return h_x, i_xy
