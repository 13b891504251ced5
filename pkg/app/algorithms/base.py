"""
Solver Base Classes and Strategy Pattern

Every algorithm (plain EVSP3, LRBVF, RCBVF, greedy) is a SolveStrategy.
A Solver runs the current strategy on an instance, times it and turns
toolkit errors into error results so batch runs keep going.
"""

import time
from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.errors import EvspError
from app.formulation.evsp3 import ModelHandle, ModelStats
from app.schemas.models import Instance
from app.schemas.reports import RunStatus
from app.schemas.solution import Solution
from app.services.milp_backend import SolveOutcome, SolverParams, SolveStatus
from app.utils.logger import logger


class AlgorithmName(str, Enum):
    """Algorithms selectable with ``solve --algo``"""
    EVSP3 = "evsp3"
    LRBVF = "lrbvf"
    RCBVF = "rcbvf"
    GREEDY = "greedy"


class AlgorithmResult(BaseModel):
    """Outcome of one algorithm run on one instance"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    algorithm: str
    instance: str
    status: RunStatus
    solution: Optional[Solution] = None
    objective: Optional[float] = Field(default=None, description="Incumbent value")
    best_bound: Optional[float] = Field(default=None, description="Proven upper bound")
    solve_seconds: float = 0.0
    total_seconds: float = 0.0
    node_count: int = 0
    stats: Optional[ModelStats] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    ledger_text: Optional[str] = None
    error: Optional[str] = None


def run_status(outcome: SolveOutcome) -> RunStatus:
    """Map a backend status to a run status"""
    return {
        SolveStatus.OPTIMAL: RunStatus.OPTIMAL,
        SolveStatus.FEASIBLE_LIMIT: RunStatus.FEASIBLE,
        SolveStatus.INFEASIBLE: RunStatus.INFEASIBLE,
        SolveStatus.NO_SOLUTION_LIMIT: RunStatus.NO_SOLUTION,
    }[outcome.status]


class SolveStrategy(ABC):
    """
    Abstract strategy interface for algorithms.

    Implementations build whatever model they need, solve it and return an
    AlgorithmResult; toolkit errors propagate to the caller.
    """

    @property
    @abstractmethod
    def name(self) -> AlgorithmName:
        """Return the algorithm this strategy implements"""
        pass

    @abstractmethod
    def run(self, inst: Instance, params: SolverParams) -> AlgorithmResult:
        """
        Solve an instance.

        Args:
            inst: Validated instance
            params: Solver parameters for every backend solve of the run

        Returns:
            AlgorithmResult
        """
        pass

    def result(
        self,
        inst: Instance,
        status: RunStatus,
        solution: Optional[Solution],
        handle: Optional[ModelHandle] = None,
        **extra: Any,
    ) -> AlgorithmResult:
        """Assemble a result, taking model statistics and solver time from the handle"""
        data: Dict[str, Any] = {
            "algorithm": self.name.value,
            "instance": inst.name,
            "status": status,
            "solution": solution,
            "objective": float(solution.objective) if solution is not None else None,
        }
        if handle is not None:
            data["stats"] = handle.stats()
            data["solve_seconds"] = handle.backend.solve_seconds
        data.update(extra)
        return AlgorithmResult(**data)


class Solver:
    """
    Runs a SolveStrategy on instances.

    Example usage:
        solver = Solver(RcbvfStrategy(), SolverParams.from_settings(time_limit_seconds=600))
        result = solver.solve(inst)

        if result.status != RunStatus.OPTIMAL:
            solver.set_strategy(LrbvfStrategy())
            result = solver.solve(inst)
    """

    def __init__(self, strategy: SolveStrategy, params: Optional[SolverParams] = None):
        self._strategy = strategy
        self.params = params or SolverParams.from_settings()
        self._execution_count = 0
        self._error_count = 0
        logger.debug(f"Initialized solver with {strategy.name.value} strategy")

    @property
    def strategy(self) -> SolveStrategy:
        return self._strategy

    def set_strategy(self, strategy: SolveStrategy) -> None:
        old = self._strategy.name
        self._strategy = strategy
        logger.info(f"Solver: switched strategy from {old.value} to {strategy.name.value}")

    def solve(self, inst: Instance) -> AlgorithmResult:
        """
        Run the current strategy.

        Returns:
            AlgorithmResult; a toolkit error becomes a result with status
            ERROR and the error message
        """
        self._execution_count += 1
        algo = self._strategy.name.value
        logger.info(f"[{algo}] solving {inst.name} (limit {self.params.time_limit_seconds}s, {self.params.profile} settings)")
        began = time.perf_counter()
        try:
            result = self._strategy.run(inst, self.params)
        except EvspError as e:
            self._error_count += 1
            logger.error(f"[{algo}] {inst.name} failed: {e}")
            result = AlgorithmResult(algorithm=algo, instance=inst.name, status=RunStatus.ERROR, error=f"{type(e).__name__}: {e}")
        result.total_seconds = time.perf_counter() - began
        logger.info(f"[{algo}] {inst.name}: {result.status.value} objective={result.objective} bound={result.best_bound} in {result.total_seconds:.2f}s")
        return result

    def get_execution_stats(self) -> Dict[str, Any]:
        return {
            "algorithm": self._strategy.name.value,
            "execution_count": self._execution_count,
            "error_count": self._error_count,
        }
