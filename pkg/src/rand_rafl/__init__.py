"""Approximation algorithms for redundancy-aware network design (RAND) and facility location (RAFL)."""
from .generate import GeneratorConfig, generate
from .laminar import build_tree, decompose_chains, preprocess, validate_laminar
from .model import (
    Assignment,
    Facility,
    PacketUniverse,
    RaflInstance,
    RandInstance,
    RandSolution,
    Terminal,
    ValidationError,
    WeightedGraph,
    eval_rafl_cost,
    eval_rand_cost,
    shortest_path_metric,
)
from .oracle import oracle_rafl, oracle_rand
from .rafl_solver import solve_rafl
from .rand_solver import SolverConfig, solve_rand, solve_rand_end_to_end, solve_rand_prim

__all__ = [
    "Assignment", "Facility", "GeneratorConfig", "PacketUniverse", "RaflInstance", "RandInstance",
    "RandSolution", "SolverConfig", "Terminal", "ValidationError", "WeightedGraph",
    "build_tree", "decompose_chains", "eval_rafl_cost", "eval_rand_cost", "generate",
    "oracle_rafl", "oracle_rand", "preprocess", "shortest_path_metric", "solve_rafl",
    "solve_rand", "solve_rand_end_to_end", "solve_rand_prim", "validate_laminar",
]
