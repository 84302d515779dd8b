"""Higher-order node embeddings from graphlet edge-orbit counts."""

from motifembed.graph import EdgeListParseError, EmptyGraphError, Graph, load_edge_list

__version__ = "0.1.0"

__all__ = [
    "EdgeListParseError",
    "EmptyGraphError",
    "Graph",
    "load_edge_list",
    "__version__",
]
