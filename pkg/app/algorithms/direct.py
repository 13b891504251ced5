"""
Plain EVSP3 Solve

The full model solved once, warm-started with the greedy solution unless
disabled.
"""

from typing import Optional

from app.config import get_settings
from app.core.time_grid import build_time_grid
from app.formulation.evsp3 import build_model, encode_solution, extract_solution
from app.schemas.models import Instance
from app.services.milp_backend import SolverParams
from app.algorithms.base import AlgorithmName, AlgorithmResult, SolveStrategy, run_status
from app.algorithms.heuristics import construct_greedy
from app.utils.logger import logger


class Evsp3Strategy(SolveStrategy):
    """
    Solve the EVSP3 model directly.

    Args:
        warm_start: Pass the greedy solution as MIP start (settings default)
        relax_implicit: Declare w, z and y implicit-binary
    """

    def __init__(self, warm_start: Optional[bool] = None, relax_implicit: bool = True):
        self.warm_start = get_settings().evsp3_greedy_warm_start if warm_start is None else warm_start
        self.relax_implicit = relax_implicit

    @property
    def name(self) -> AlgorithmName:
        return AlgorithmName.EVSP3

    def run(self, inst: Instance, params: SolverParams) -> AlgorithmResult:
        grid = build_time_grid(inst)
        handle, reg = build_model(inst, relax_implicit=self.relax_implicit, grid=grid)
        start = None
        if self.warm_start:
            greedy = construct_greedy(inst, grid)
            start = encode_solution(inst, reg, greedy)
            logger.info(f"EVSP3: warm start with greedy objective {greedy.objective}")

        outcome = handle.backend.solve_mip(params, warm_start=start)
        sol = extract_solution(inst, reg, outcome, grid) if outcome.has_solution else None
        return self.result(
            inst,
            run_status(outcome),
            sol,
            handle,
            best_bound=outcome.best_bound if outcome.has_solution else None,
            node_count=outcome.node_count,
            diagnostics={"warm_start": self.warm_start},
        )
