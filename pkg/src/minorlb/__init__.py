"""Lower-bound laboratory for probabilistic tree and minor-excluded embeddings."""

from .errors import DisconnectedGraphError, GraphFormatError, ResourceCeilingError
from .graph import (
    Graph,
    Metric,
    contract_edge,
    format_graph,
    max_edge_disjoint_paths,
    parse_graph,
    shortest_path_metric,
    subdivide,
    to_dot,
)

__version__ = "0.1.0"

__all__ = [
    "DisconnectedGraphError",
    "Graph",
    "GraphFormatError",
    "Metric",
    "ResourceCeilingError",
    "contract_edge",
    "format_graph",
    "max_edge_disjoint_paths",
    "parse_graph",
    "shortest_path_metric",
    "subdivide",
    "to_dot",
]
