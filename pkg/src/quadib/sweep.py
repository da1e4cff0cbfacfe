"""Beta sweeps producing information-plane points and their CSV form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from . import info, search
from .search import SearchResult
from .world import ParseError, WorldModel

ALGORITHMS = ("greedy", "qtree")

CSV_HEADER = "beta,algorithm,leaf_count,i_tx_bits,i_ty_bits,objective_bits,i_xy_bits,h_x_bits"


@dataclass(frozen=True)
class InfoPlanePoint:
    """One solved abstraction: compression/relevance coordinates at one beta.

    i_xy_bits and h_x_bits are world constants repeated per row so the CSV
    is self-normalizing.
    """

    beta: float
    algorithm: str
    leaf_count: int
    i_tx_bits: float
    i_ty_bits: float
    objective_bits: float
    i_xy_bits: float
    h_x_bits: float


def _check_betas(betas: Sequence[float]) -> list[float]:
    betas = [float(b) for b in betas]
    if not betas:
        raise ValueError("beta list must not be empty")
    for b in betas:
        if not (math.isfinite(b) and b > 0):
            raise ValueError(f"beta values must be positive and finite, got {b!r}")
    if any(b1 >= b2 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("beta values must be strictly increasing")
    return betas


def _check_algorithms(algorithms: Iterable[str]) -> list[str]:
    chosen = [a for a in ALGORITHMS if a in set(algorithms)]
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise ValueError(f"unknown algorithms: {sorted(unknown)}")
    if not chosen:
        raise ValueError("at least one algorithm is required")
    return chosen


def sweep_results(
    world: WorldModel,
    betas: Sequence[float],
    algorithms: Iterable[str] = ALGORITHMS,
) -> Iterator[tuple[SearchResult, InfoPlanePoint]]:
    """Run the selected algorithms over the beta grid, yielding full results.

    Node statistics are computed once and shared; the q-table is rebuilt
    per beta since the search values depend on it.
    """
    betas = _check_betas(betas)
    algorithms = _check_algorithms(algorithms)
    stats = info.compute_node_stats(world)
    h_x, i_xy = info.world_information(world)
    for beta in betas:
        qtable = search.compute_q_table(stats, beta) if "qtree" in algorithms else None
        for algorithm in algorithms:
            if algorithm == "greedy":
                result = search.greedy_search(stats, beta)
            else:
                result = search.qtree_search(stats, qtable, beta)
            i_tx, i_ty = info.tree_information(result.tree, world)
            point = InfoPlanePoint(
                beta=beta,
                algorithm=algorithm,
                leaf_count=result.tree.leaf_count,
                i_tx_bits=i_tx,
                i_ty_bits=i_ty,
                objective_bits=result.objective,
                i_xy_bits=i_xy,
                h_x_bits=h_x,
            )
            yield result, point


def beta_sweep(
    world: WorldModel,
    betas: Sequence[float],
    algorithms: Iterable[str] = ALGORITHMS,
) -> list[InfoPlanePoint]:
    """One information-plane point per (beta, algorithm)."""
    return [point for _, point in sweep_results(world, betas, algorithms)]


def _fmt(value: float) -> str:
    return f"{float(value):.12g}"


def emit_metrics_csv(points: Iterable[InfoPlanePoint]) -> str:
    """Serialize points at 12 significant digits, rows sorted by (algorithm, beta)."""
    rows = sorted(points, key=lambda p: (p.algorithm, p.beta))
    lines = [CSV_HEADER]
    for p in rows:
        lines.append(
            ",".join(
                (
                    _fmt(p.beta),
                    p.algorithm,
                    str(int(p.leaf_count)),
                    _fmt(p.i_tx_bits),
                    _fmt(p.i_ty_bits),
                    _fmt(p.objective_bits),
                    _fmt(p.i_xy_bits),
                    _fmt(p.h_x_bits),
                )
            )
        )
    return "\n".join(lines) + "\n"


def parse_metrics_csv(text: str) -> list[InfoPlanePoint]:
    """Inverse of emit_metrics_csv (values at 12 significant digits)."""
    lines = [line for line in text.split("\n") if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ParseError("metrics CSV header mismatch")
    points = []
    for i, line in enumerate(lines[1:], start=1):
        fields = line.split(",")
        if len(fields) != 8:
            raise ParseError(f"metrics CSV row {i}: expected 8 fields, got {len(fields)}")
        try:
            points.append(
                InfoPlanePoint(
                    beta=float(fields[0]),
                    algorithm=fields[1],
                    leaf_count=int(fields[2]),
                    i_tx_bits=float(fields[3]),
                    i_ty_bits=float(fields[4]),
                    objective_bits=float(fields[5]),
                    i_xy_bits=float(fields[6]),
                    h_x_bits=float(fields[7]),
                )
            )
        except ValueError as exc:
            raise ParseError(f"metrics CSV row {i}: {exc}") from None
    return points
