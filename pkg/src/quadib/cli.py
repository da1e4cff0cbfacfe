"""Command-line surface: abstract a map, sweep betas, render trees, run the oracle.

Exit codes: 0 success, 1 usage error, 2 input/parse error.  All file writes
are atomic (temp file + rename) and every run is deterministic: identical
inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import info, quadtree, render, search, sweep, world
from .quadtree import TreeAbstraction, node_offset
from .search import SearchResult
from .world import ConfigError, ParseError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sig12(value: float) -> float:
    return float(f"{float(value):.12g}")


def export_tree_json(result: SearchResult, stats: info.NodeStatsTable) -> str:
    """Tree JSON extended with per-leaf statistics and run metadata.

    Leaves carry "p_t" and "p_y_given_t" next to their geometry; the top
    level records beta, algorithm, and objective_bits.  Keys are sorted and
    floats carry 12 significant digits.
    """
    doc = quadtree.tree_to_json(result.tree)
    for entry, leaf in zip(doc["leaves"], quadtree.leaves(result.tree)):
        offset = node_offset(leaf)
        entry["p_t"] = _sig12(stats.mass[offset])
        entry["p_y_given_t"] = [_sig12(v) for v in stats.cond[offset]]
    doc["beta"] = _sig12(result.beta)
    doc["algorithm"] = result.algorithm
    doc["objective_bits"] = _sig12(result.objective)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def import_tree_json(text: str) -> tuple[TreeAbstraction, dict]:
    """Parse a tree JSON document back into a tree plus its raw fields."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid tree JSON: {exc}") from None
    try:
        tree = quadtree.tree_from_json(doc)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return tree, doc


def _write_atomic(path: str, payload: bytes | str) -> None:
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-quadib-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _add_map_args(parser: _Parser) -> None:
    parser.add_argument("--map", required=True, help="occupancy map file")
    parser.add_argument(
        "--map-format",
        choices=("pgm", "csv"),
        default=None,
        help="map format (default: by file extension)",
    )
    parser.add_argument(
        "--prior",
        default='{"kind":"uniform"}',
        help="prior spec: inline JSON or a path to a JSON file",
    )
    parser.add_argument("--seed", type=int, default=None, help="reserved, unused")


def build_parser() -> _Parser:
    parser = _Parser(prog="quadib", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_abstract = sub.add_parser("abstract", help="solve one beta and export tree/render/metrics")
    _add_map_args(p_abstract)
    p_abstract.add_argument("--beta", type=float, required=True)
    p_abstract.add_argument("--algo", choices=("greedy", "qtree", "both"), default="qtree")
    p_abstract.add_argument("--out", required=True, help="output directory")
    p_abstract.add_argument("--scale", type=int, default=4, help="pixels per finest cell")
    p_abstract.set_defaults(func=_cmd_abstract)

    p_sweep = sub.add_parser("sweep", help="solve a beta grid and emit metrics CSV")
    _add_map_args(p_sweep)
    p_sweep.add_argument("--betas", required=True, help="comma-separated increasing betas")
    p_sweep.add_argument("--algo", choices=("greedy", "qtree", "both"), default="both")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--scale", type=int, default=4, help="pixels per finest cell")
    p_sweep.add_argument(
        "--render", action="store_true", help="also write per-beta tree JSON and renders"
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_render = sub.add_parser("render", help="render an exported tree over a map")
    _add_map_args(p_render)
    p_render.add_argument("--tree", required=True, help="tree JSON file")
    p_render.add_argument("--out", required=True, help="output directory")
    p_render.add_argument("--scale", type=int, default=4, help="pixels per finest cell")
    p_render.set_defaults(func=_cmd_render)

    p_oracle = sub.add_parser("oracle", help="exhaustive optimum for tiny maps (depth <= 3)")
    _add_map_args(p_oracle)
    p_oracle.add_argument("--beta", type=float, required=True)
    p_oracle.add_argument("--out", default=None, help="optional output directory")
    p_oracle.set_defaults(func=_cmd_oracle)

    return parser


def _load_world(args) -> world.WorldModel:
    fmt = args.map_format
    if fmt is None:
        ext = os.path.splitext(args.map)[1].lower()
        if ext == ".pgm":
            fmt = "pgm"
        elif ext == ".csv":
            fmt = "csv"
        else:
            raise UsageError(
                f"cannot infer format of --map {args.map!r}; pass --map-format"
            )
    with open(args.map, "rb") as handle:
        raw = handle.read()
    if fmt == "pgm":
        occ = world.load_occupancy_pgm(raw)
    else:
        occ = world.load_occupancy_csv(raw.decode("utf-8"))
    prior_arg = args.prior.strip()
    if prior_arg.startswith("{"):
        spec = world.PriorSpec.from_json(prior_arg, base_dir=".")
    else:
        with open(prior_arg, "r", encoding="utf-8") as handle:
            spec = world.PriorSpec.from_json(
                handle.read(), base_dir=os.path.dirname(prior_arg) or "."
            )
    weights = world.build_prior(spec, occ.width, occ.height)
    return world.assemble_world(occ, weights)


def _check_positive(value: float, flag: str) -> float:
    if not value > 0:
        raise UsageError(f"{flag} must be > 0, got {value!r}")
    return float(value)


def _check_scale(scale: int) -> int:
    if scale < 1:
        raise UsageError(f"--scale must be >= 1, got {scale}")
    return scale


def _parse_betas(text: str) -> list[float]:
    try:
        betas = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"--betas must be comma-separated numbers, got {text!r}") from None
    if not betas:
        raise UsageError("--betas must list at least one value")
    if any(not b > 0 for b in betas):
        raise UsageError("--betas values must all be > 0")
    if any(a >= b for a, b in zip(betas, betas[1:])):
        raise UsageError("--betas values must be strictly increasing")
    return betas


def _run_algorithms(stats, beta: float, algo: str) -> list[SearchResult]:
    algorithms = ("greedy", "qtree") if algo == "both" else (algo,)
    results = []
    for name in algorithms:
        if name == "greedy":
            results.append(search.greedy_search(stats, beta))
        else:
            qtable = search.compute_q_table(stats, beta)
            results.append(search.qtree_search(stats, qtable, beta))
    return results


def _point_for(result: SearchResult, model, constants) -> sweep.InfoPlanePoint:
    h_x, i_xy = constants
    i_tx, i_ty = info.tree_information(result.tree, model)
    return sweep.InfoPlanePoint(
        beta=result.beta,
        algorithm=result.algorithm,
        leaf_count=result.tree.leaf_count,
        i_tx_bits=i_tx,
        i_ty_bits=i_ty,
        objective_bits=result.objective,
        i_xy_bits=i_xy,
        h_x_bits=h_x,
    )


def _beta_tag(beta: float) -> str:
    return f"{beta:.12g}".replace(".", "p").replace("+", "").replace("-", "m")


def _cmd_abstract(args) -> int:
    beta = _check_positive(args.beta, "--beta")
    scale = _check_scale(args.scale)
    model = _load_world(args)
    stats = info.compute_node_stats(model)
    constants = info.world_information(model)
    os.makedirs(args.out, exist_ok=True)
    results = _run_algorithms(stats, beta, args.algo)
    points = [_point_for(result, model, constants) for result in results]
    suffixed = len(results) > 1
    for result in results:
        tag = f"_{result.algorithm}" if suffixed else ""
        _write_atomic(
            os.path.join(args.out, f"tree{tag}.json"), export_tree_json(result, stats)
        )
        _write_atomic(
            os.path.join(args.out, f"abstraction{tag}.ppm"),
            render.render_abstraction(result.tree, stats, scale),
        )
    _write_atomic(
        os.path.join(args.out, "metrics.csv"), sweep.emit_metrics_csv(points)
    )
    return 0


def _cmd_sweep(args) -> int:
    betas = _parse_betas(args.betas)
    scale = _check_scale(args.scale)
    model = _load_world(args)
    algorithms = ("greedy", "qtree") if args.algo == "both" else (args.algo,)
    os.makedirs(args.out, exist_ok=True)
    stats = info.compute_node_stats(model) if args.render else None
    points = []
    for result, point in sweep.sweep_results(model, betas, algorithms):
        points.append(point)
        if args.render:
            tag = f"{result.algorithm}_beta{_beta_tag(result.beta)}"
            _write_atomic(
                os.path.join(args.out, f"tree_{tag}.json"),
                export_tree_json(result, stats),
            )
            _write_atomic(
                os.path.join(args.out, f"abstraction_{tag}.ppm"),
                render.render_abstraction(result.tree, stats, scale),
            )
    _write_atomic(
        os.path.join(args.out, "metrics.csv"), sweep.emit_metrics_csv(points)
    )
    return 0


def _cmd_render(args) -> int:
    scale = _check_scale(args.scale)
    model = _load_world(args)
    with open(args.tree, "r", encoding="utf-8") as handle:
        tree, _ = import_tree_json(handle.read())
    if tree.depth_limit != model.depth:
        raise ParseError(
            f"tree depth limit {tree.depth_limit} does not match the "
            f"map's depth {model.depth}"
        )
    stats = info.compute_node_stats(model)
    os.makedirs(args.out, exist_ok=True)
    _write_atomic(
        os.path.join(args.out, "abstraction.ppm"),
        render.render_abstraction(tree, stats, scale),
    )
    return 0


def _cmd_oracle(args) -> int:
    beta = _check_positive(args.beta, "--beta")
    model = _load_world(args)
    if model.depth > search.MAX_BRUTE_FORCE_DEPTH:
        raise ConfigError(
            f"oracle supports maps up to {1 << search.MAX_BRUTE_FORCE_DEPTH}x"
            f"{1 << search.MAX_BRUTE_FORCE_DEPTH} cells (depth <= "
            f"{search.MAX_BRUTE_FORCE_DEPTH}); this map has depth {model.depth}"
        )
    tree, objective = search.brute_force_optimum(model, beta)
    print(f"objective_bits={objective:.12g}")
    print(f"leaf_count={tree.leaf_count}")
    if args.out:
        stats = info.compute_node_stats(model)
        result = SearchResult(
            tree=tree,
            objective=objective,
            expansions=(),
            iterations=0,
            beta=beta,
            algorithm="oracle",
        )
        os.makedirs(args.out, exist_ok=True)
        _write_atomic(
            os.path.join(args.out, "tree.json"), export_tree_json(result, stats)
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, ConfigError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


run = main

if __name__ == "__main__":
    sys.exit(main())
