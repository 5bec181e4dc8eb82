"""Exact maximum-expectation matching with repeated recourse on graphs whose
edges may fail."""

from .graph import (
    EdgeSet,
    FailureGraph,
    GraphError,
    Matching,
    build_graph,
    connected_components,
    residual_after_pattern,
)
from .matchings import all_matchings, best_static_matching, count_matchings
from .solver import (
    UNLIMITED,
    FailurePattern,
    MemoTable,
    RecourseBudget,
    SolveResult,
    SolveTimeout,
    enumerate_patterns,
    evaluate_matching,
    solve,
    value_forcing_first,
)

__all__ = [
    "EdgeSet", "FailureGraph", "GraphError", "Matching", "build_graph",
    "connected_components", "residual_after_pattern", "all_matchings",
    "best_static_matching", "count_matchings", "UNLIMITED", "FailurePattern",
    "MemoTable", "RecourseBudget", "SolveResult", "SolveTimeout",
    "enumerate_patterns", "evaluate_matching", "solve", "value_forcing_first",
]
