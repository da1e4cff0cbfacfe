"""Resource-aware multi-resolution quadtree abstractions of occupancy grids.

Given a probabilistic occupancy grid and a cell prior, this package finds
the pruned quadtree that best trades compression against retained
occupancy information at a chosen rationality weight beta, via either a
greedy expansion search or the provably optimal Q-tree search.
"""

from .cli import export_tree_json, import_tree_json, main, run
from .demo import demo_occupancy
from .info import (
    NodeStatsTable,
    compute_node_stats,
    entropy,
    expansion_gain,
    expansion_gain_table,
    js_divergence,
    kl_divergence,
    mutual_information,
    tree_information,
    tree_objective,
    tree_objective_direct,
    world_information,
)
from .quadtree import (
    ROOT,
    CellRegion,
    NodeId,
    TreeAbstraction,
    cell_region,
    children,
    enumerate_trees,
    expand,
    is_subtree,
    leaf_spans,
    leaves,
    parent,
    root_tree,
    subtree_rooted_at,
    tree_count,
    tree_from_json,
    tree_nodes,
    tree_to_json,
)
from .render import render_abstraction
from .search import (
    QTable,
    SearchResult,
    brute_force_optimum,
    compute_q_table,
    greedy_search,
    positive_q_closure,
    qtree_search,
)
from .sweep import (
    InfoPlanePoint,
    beta_sweep,
    emit_metrics_csv,
    parse_metrics_csv,
    sweep_results,
)
from .world import (
    ConfigError,
    OccupancyField,
    OutcomeSpace,
    ParseError,
    PriorSpec,
    WorldModel,
    assemble_world,
    build_prior,
    load_occupancy_csv,
    load_occupancy_pgm,
    write_pgm,
)

__version__ = "0.1.0"

__all__ = [
    "CellRegion",
    "ConfigError",
    "InfoPlanePoint",
    "NodeId",
    "NodeStatsTable",
    "OccupancyField",
    "OutcomeSpace",
    "ParseError",
    "PriorSpec",
    "QTable",
    "ROOT",
    "SearchResult",
    "TreeAbstraction",
    "WorldModel",
    "assemble_world",
    "beta_sweep",
    "brute_force_optimum",
    "build_prior",
    "cell_region",
    "children",
    "compute_node_stats",
    "compute_q_table",
    "demo_occupancy",
    "emit_metrics_csv",
    "entropy",
    "enumerate_trees",
    "expand",
    "expansion_gain",
    "expansion_gain_table",
    "export_tree_json",
    "greedy_search",
    "import_tree_json",
    "is_subtree",
    "js_divergence",
    "kl_divergence",
    "leaf_spans",
    "leaves",
    "load_occupancy_csv",
    "load_occupancy_pgm",
    "main",
    "mutual_information",
    "parent",
    "parse_metrics_csv",
    "positive_q_closure",
    "qtree_search",
    "render_abstraction",
    "root_tree",
    "run",
    "subtree_rooted_at",
    "sweep_results",
    "tree_count",
    "tree_from_json",
    "tree_information",
    "tree_nodes",
    "tree_objective",
    "tree_objective_direct",
    "tree_to_json",
    "world_information",
    "write_pgm",
]
