"""
HiGHS Backend

Builds a fresh highspy session from the stored model for every solve, so
bound changes between solves are always taken from the base class.
"""

import time
from pathlib import Path
from typing import List, Optional, Union

import highspy
import numpy as np

from app.config import get_settings
from app.errors import SolverError
from app.services.milp_backend import (
    CutSetting,
    FocusSetting,
    LpMethod,
    MilpBackend,
    SolveOutcome,
    SolverParams,
    SolveStatus,
    VarKind,
)
from app.utils.logger import logger

# closest HiGHS analogues of the settings study
CUTS_OFF_OPTIONS = {"mip_pool_soft_limit": 1}
FEASIBILITY_FOCUS_OPTIONS = {"mip_heuristic_effort": 0.3}

OBJECTIVE_SENSE = highspy.ObjSense.kMaximize
# multiplier turning HiGHS column duals into maximization reduced costs
DUAL_SIGN = {highspy.ObjSense.kMaximize: 1.0, highspy.ObjSense.kMinimize: -1.0}

_LIMIT_STATUS_NAMES = (
    "kTimeLimit",
    "kIterationLimit",
    "kSolutionLimit",
    "kObjectiveBound",
    "kObjectiveTarget",
    "kInterrupt",
    "kMemoryLimit",
)


def _status_set(names) -> set:
    return {getattr(highspy.HighsModelStatus, n) for n in names if hasattr(highspy.HighsModelStatus, n)}


class HighsBackend(MilpBackend):
    """MilpBackend on top of highspy"""

    def __init__(self):
        super().__init__()
        self._output = get_settings().solver_output

    @property
    def name(self) -> str:
        return "highs"

    @property
    def supports_reduced_costs(self) -> bool:
        return True

    def _set_option(self, h: highspy.Highs, option: str, value) -> None:
        status = h.setOptionValue(option, value)
        if status != highspy.HighsStatus.kOk:
            logger.warning(f"highs: option {option}={value!r} rejected ({status})")

    def _build(self, relax: bool, params: SolverParams) -> highspy.Highs:
        h = highspy.Highs()
        self._set_option(h, "output_flag", bool(self._output))
        self._set_option(h, "time_limit", float(params.time_limit_seconds))
        self._set_option(h, "threads", int(params.threads))
        self._set_option(h, "random_seed", 0)
        self._set_option(h, "presolve", params.presolve.value)
        if relax and params.lp_method == LpMethod.DUAL_SIMPLEX:
            self._set_option(h, "solver", "simplex")
            self._set_option(h, "simplex_strategy", 1)
        if not relax:
            if params.cuts == CutSetting.OFF:
                for option, value in CUTS_OFF_OPTIONS.items():
                    self._set_option(h, option, value)
            if params.focus == FocusSetting.FEASIBILITY:
                for option, value in FEASIBILITY_FOCUS_OPTIONS.items():
                    self._set_option(h, option, value)

        n = self.num_variables
        h.addVars(n, np.array(self._lo, dtype=np.float64), np.array(self._hi, dtype=np.float64))
        h.changeColsCost(n, np.arange(n, dtype=np.int32), np.array(self._cost, dtype=np.float64))
        h.changeObjectiveSense(OBJECTIVE_SENSE)

        m = self.num_constraints
        if m:
            starts = np.zeros(m, dtype=np.int32)
            nnz = 0
            for r in range(m):
                starts[r] = nnz
                nnz += len(self._row_idx[r])
            index = np.fromiter((j for row in self._row_idx for j in row), dtype=np.int32, count=nnz)
            value = np.fromiter((c for row in self._row_val for c in row), dtype=np.float64, count=nnz)
            h.addRows(
                m,
                np.array(self._row_lo, dtype=np.float64),
                np.array(self._row_hi, dtype=np.float64),
                nnz,
                starts,
                index,
                value,
            )

        if not relax:
            for i, kind in enumerate(self._kind):
                if kind == VarKind.BINARY:
                    h.changeColIntegrality(i, highspy.HighsVarType.kInteger)
        return h

    def _solve(self, relax: bool, params: SolverParams, warm_start: Optional[List[float]]) -> SolveOutcome:
        if self.num_variables == 0:
            return SolveOutcome(
                status=SolveStatus.OPTIMAL,
                objective_value=0.0,
                best_bound=0.0,
                values=[],
                reduced_costs=[] if relax else None,
            )

        h = self._build(relax, params)
        if warm_start is not None:
            start = highspy.HighsSolution()
            start.col_value = list(warm_start)
            status = h.setSolution(start)
            if status == highspy.HighsStatus.kError:
                logger.warning("highs: warm start rejected")

        began = time.perf_counter()
        h.run()
        wall = time.perf_counter() - began

        model_status = h.getModelStatus()
        info = h.getInfo()
        solution = h.getSolution()
        has_values = bool(solution.value_valid)

        if model_status == highspy.HighsModelStatus.kOptimal:
            status = SolveStatus.OPTIMAL
        elif model_status == highspy.HighsModelStatus.kInfeasible:
            status = SolveStatus.INFEASIBLE
            has_values = False
        elif model_status in _status_set(_LIMIT_STATUS_NAMES):
            status = SolveStatus.FEASIBLE_LIMIT if has_values else SolveStatus.NO_SOLUTION_LIMIT
        else:
            raise SolverError(f"highs stopped with {h.modelStatusToString(model_status)}")

        values = list(solution.col_value) if has_values else None
        objective = float(info.objective_function_value) if has_values else None
        if relax:
            bound = objective
            nodes = 0
        else:
            bound = float(info.mip_dual_bound)
            nodes = max(0, int(info.mip_node_count))

        reduced = None
        if relax and has_values and solution.dual_valid:
            reduced = self._normalized_reduced_costs(list(solution.col_dual))

        return SolveOutcome(
            status=status,
            objective_value=objective,
            best_bound=bound,
            values=values,
            reduced_costs=reduced,
            wall_seconds=wall,
            node_count=nodes,
        )

    def _normalized_reduced_costs(self, duals: List[float]) -> List[float]:
        # HiGHS reports c - A^T y for the sense as posed; posed as a maximization
        # that is already positive at an upper bound and negative at a lower one
        return [DUAL_SIGN[OBJECTIVE_SENSE] * d for d in duals]

    def write_lp(self, path: Union[str, Path]) -> None:
        h = self._build(relax=False, params=SolverParams())
        for i, name in enumerate(self._names):
            h.passColName(i, name)
        for r, name in enumerate(self._row_names):
            h.passRowName(r, name)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        h.writeModel(str(path))
        logger.info(f"highs: wrote {self.num_variables} columns, {self.num_constraints} rows to {path}")
