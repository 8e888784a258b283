"""Exact shortest-path and distance queries on road networks.

Five query engines share one graph core: bidirectional Dijkstra, Contraction
Hierarchies, Transit Node Routing, SILC and PCPD, plus a benchmark harness.
"""
from .graph import (INF, BoundingBox, ContractViolation, DimacsError, IndexCorruption,
                    Path, RoadNetwork, load_dimacs, path_concat, validate, write_dimacs)

__all__ = [
    "INF", "BoundingBox", "ContractViolation", "DimacsError", "IndexCorruption",
    "Path", "RoadNetwork", "load_dimacs", "path_concat", "validate", "write_dimacs",
]
__version__ = "0.1.0"
