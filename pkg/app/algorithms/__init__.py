"""
Algorithms Package

Solve strategies for EVSP instances:
- Evsp3Strategy: the model solved directly
- LrbvfStrategy: LP-based variable fixing heuristic
- RcbvfStrategy: exact solve with parking-space and reduced-cost fixing
- GreedyStrategy: solver-free construction
"""

from typing import Any, Dict, Type

from app.algorithms.base import AlgorithmName, AlgorithmResult, SolveStrategy, Solver
from app.algorithms.direct import Evsp3Strategy
from app.algorithms.heuristics import GreedyStrategy, LrbvfStrategy, construct_greedy, lrbvf
from app.algorithms.exact import (
    FixingLedger,
    RcbvfStrategy,
    fix_parking_spaces,
    parking_fixings,
    rcbvf,
    reduced_cost_fix,
    repair_warm_start,
)

STRATEGIES: Dict[AlgorithmName, Type[SolveStrategy]] = {
    AlgorithmName.EVSP3: Evsp3Strategy,
    AlgorithmName.LRBVF: LrbvfStrategy,
    AlgorithmName.RCBVF: RcbvfStrategy,
    AlgorithmName.GREEDY: GreedyStrategy,
}

_OPTIONS = {
    AlgorithmName.EVSP3: {"warm_start", "relax_implicit"},
    AlgorithmName.RCBVF: {"maxrun_seconds"},
}


def get_strategy(name: str, **options: Any) -> SolveStrategy:
    """
    Instantiate a strategy by algorithm name.

    Options a strategy does not accept (or that are None) are ignored, so
    callers can pass e.g. maxrun_seconds for any algorithm.
    """
    algo = AlgorithmName(name)
    accepted = _OPTIONS.get(algo, set())
    cls = STRATEGIES[algo]
    return cls(**{k: v for k, v in options.items() if k in accepted and v is not None})


__all__ = [
    "AlgorithmName",
    "AlgorithmResult",
    "SolveStrategy",
    "Solver",
    "Evsp3Strategy",
    "LrbvfStrategy",
    "RcbvfStrategy",
    "GreedyStrategy",
    "FixingLedger",
    "STRATEGIES",
    "get_strategy",
    "construct_greedy",
    "lrbvf",
    "rcbvf",
    "fix_parking_spaces",
    "parking_fixings",
    "reduced_cost_fix",
    "repair_warm_start",
]
