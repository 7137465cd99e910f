"""Stabilized column generation for the LP relaxation of graph coloring."""

from .colgen import CgConfig, CgResult, StabPolicy, run_colgen
from .graph import Column, Graph, generate_random_graph, parse_dimacs
from .lp import DualVector, LinearProgram, build_dual_lp, solve_lp
from .pricing import PricingResult, enumerate_all_mis, price_exact, price_heuristic

__version__ = "0.1.0"

__all__ = [
    "CgConfig", "CgResult", "StabPolicy", "run_colgen",
    "Column", "Graph", "generate_random_graph", "parse_dimacs",
    "DualVector", "LinearProgram", "build_dual_lp", "solve_lp",
    "PricingResult", "enumerate_all_mis", "price_exact", "price_heuristic",
    "__version__",
]
