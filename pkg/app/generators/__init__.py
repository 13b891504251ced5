"""
Generators Package

Seeded benchmark instances and the independent set reduction.
"""

from app.generators.benchmark import generate_grid, generate_vamo, generate_tiny
from app.generators.reduction import (
    Graph,
    read_edge_list,
    misp_to_evsp,
    max_independent_set_bruteforce,
)

__all__ = [
    "generate_grid",
    "generate_vamo",
    "generate_tiny",
    "Graph",
    "read_edge_list",
    "misp_to_evsp",
    "max_independent_set_bruteforce",
]
