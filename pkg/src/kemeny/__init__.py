"""Kemeny constant computation on undirected graphs.

Exact spectral evaluation, an unbiased estimator built on uniform
spanning-tree sampling with 2-forest matching, and incremental
maintenance of estimates under edge insertions and deletions.
"""

from .errors import (CapacityError, ConnectivityError, ConvergenceError,
                     CorruptIndexError, EmptyGraphError, InputError,
                     InvalidEdgeError, InvalidPathError, KemenyError,
                     ParseError)
from .graph import (Graph, bridge_edges, eccentricity_from, from_edges,
                    is_connected, largest_connected_component,
                    parse_edge_list, to_edge_list_text)
from .spanning import (RootedTree, bfs_tree, count_cut_crossings, cut_link,
                       dfs_tree, link_cut, wilson_tree, wilson_tree_with_edge)
from .exact import (TwoForest, all_two_forests, count_spanning_trees,
                    effective_resistance_exact,
                    effective_resistance_iterative, enumerate_spanning_trees,
                    enumerate_two_forests, kemeny_eigen,
                    kemeny_forest_formula, path_mapping_sets, spectrum)
from .estimator import (EstimateConfig, EstimateResult, contribution,
                        contribution_fenwick, contribution_naive,
                        estimate_kemeny, plan_sample_size, reference_tree,
                        resolve_root)
from .fenwick import FenwickTree
from .dynamic import (SampleRecord, SampleStore, UpdateEvent, build_index,
                      format_update_stream, generate_updates,
                      parse_update_stream, read_index_header)

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ConnectivityError", "ConvergenceError",
    "CorruptIndexError", "EmptyGraphError", "InputError", "InvalidEdgeError",
    "InvalidPathError", "KemenyError", "ParseError",
    "Graph", "bridge_edges", "eccentricity_from", "from_edges",
    "is_connected", "largest_connected_component", "parse_edge_list",
    "to_edge_list_text",
    "RootedTree", "bfs_tree", "count_cut_crossings", "cut_link", "dfs_tree",
    "link_cut", "wilson_tree", "wilson_tree_with_edge",
    "TwoForest", "all_two_forests", "count_spanning_trees",
    "effective_resistance_exact", "effective_resistance_iterative",
    "enumerate_spanning_trees", "enumerate_two_forests", "kemeny_eigen",
    "kemeny_forest_formula", "path_mapping_sets", "spectrum",
    "EstimateConfig", "EstimateResult", "contribution",
    "contribution_fenwick", "contribution_naive", "estimate_kemeny",
    "plan_sample_size", "reference_tree", "resolve_root",
    "FenwickTree",
    "SampleRecord", "SampleStore", "UpdateEvent", "build_index",
    "format_update_stream", "generate_updates", "parse_update_stream",
    "read_index_header",
    "__version__",
]
