"""
MILP Backend Interface

A narrow, swappable interface to an LP/MIP solver. The base class keeps
the model (columns, rows, current and original bounds) in plain lists so
fixing and releasing are exact and backend independent; a concrete backend
only has to turn that model into a solver run.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field

from app.config import get_settings
from app.errors import (
    BackendCapabilityError,
    BackendError,
    InvalidBoundsError,
    ModelFinalizedError,
    UnknownVariableError,
)
from app.utils.logger import logger


# ===========================================
# Enums and parameters
# ===========================================

class VarKind(str, Enum):
    """Variable kinds"""
    CONTINUOUS = "continuous"
    BINARY = "binary"
    IMPLICIT_BINARY = "implicit-binary"


class Sense(str, Enum):
    """Constraint senses"""
    LE = "<="
    EQ = "="
    GE = ">="


class SolveStatus(str, Enum):
    """Outcome classes of a solve"""
    OPTIMAL = "optimal"
    FEASIBLE_LIMIT = "feasible-limit"
    INFEASIBLE = "infeasible"
    NO_SOLUTION_LIMIT = "no-solution-limit"


class CutSetting(str, Enum):
    DEFAULT = "default"
    OFF = "off"


class FocusSetting(str, Enum):
    DEFAULT = "default"
    FEASIBILITY = "feasibility"


class LpMethod(str, Enum):
    DUAL_SIMPLEX = "dual-simplex"
    DEFAULT = "default"


class PresolveSetting(str, Enum):
    CHOOSE = "choose"
    ON = "on"
    OFF = "off"


class SolverParams(BaseModel):
    """Parameters of one solve"""
    time_limit_seconds: float = Field(default=3600.0, gt=0)
    threads: int = Field(default=1, ge=1)
    cuts: CutSetting = CutSetting.DEFAULT
    focus: FocusSetting = FocusSetting.DEFAULT
    lp_method: LpMethod = LpMethod.DUAL_SIMPLEX
    presolve: PresolveSetting = PresolveSetting.CHOOSE

    @classmethod
    def from_settings(cls, **overrides) -> "SolverParams":
        """Defaults from Settings, then explicit overrides (None values ignored)"""
        settings = get_settings()
        data = {
            "time_limit_seconds": settings.time_limit_seconds,
            "threads": settings.threads,
            "presolve": settings.presolve,
        }
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def with_time_limit(self, seconds: float) -> "SolverParams":
        return self.model_copy(update={"time_limit_seconds": seconds})

    @property
    def profile(self) -> str:
        if self.cuts == CutSetting.OFF or self.focus == FocusSetting.FEASIBILITY:
            return "new"
        return "default"


# ===========================================
# Handles and outcomes
# ===========================================

@dataclass(frozen=True)
class VarRef:
    """Opaque handle of one column"""
    index: int
    kind: VarKind
    lo: float
    hi: float
    name: str
    owner: int


@dataclass(frozen=True)
class ConstraintRef:
    """Opaque handle of one row"""
    index: int
    name: str


class SolveOutcome(BaseModel):
    """Result of one LP or MIP solve"""
    status: SolveStatus
    objective_value: Optional[float] = None
    best_bound: Optional[float] = None
    values: Optional[List[float]] = None
    reduced_costs: Optional[List[float]] = Field(
        default=None,
        description="LP only; r = c - A^T y, positive at an upper bound of a maximization"
    )
    wall_seconds: float = 0.0
    node_count: int = 0

    @property
    def has_solution(self) -> bool:
        return self.values is not None

    def value(self, v: VarRef) -> float:
        if self.values is None:
            raise BackendError(f"no primal values (status {self.status.value})")
        return self.values[v.index]

    def reduced_cost(self, v: VarRef) -> float:
        if self.reduced_costs is None:
            raise BackendError("no reduced costs in this outcome")
        return self.reduced_costs[v.index]


WarmStart = Union[Sequence[float], Dict[VarRef, float]]


# ===========================================
# Backend base class
# ===========================================

class MilpBackend(ABC):
    """
    Abstract MILP model plus solver session.

    The model is open until the first solve (or finalize()); afterwards
    only bounds may change, through fix_variable/release_variable.

    Example usage:
        backend = create_backend()
        x = backend.add_variable(VarKind.BINARY, 0, 1, objective=38)
        backend.add_linear_constraint([(x, 1.0)], Sense.LE, 1)
        outcome = backend.solve_mip(SolverParams())
    """

    def __init__(self):
        self._kind: List[VarKind] = []
        self._names: List[str] = []
        self._cost: List[float] = []
        self._lo: List[float] = []
        self._hi: List[float] = []
        self._orig_lo: List[float] = []
        self._orig_hi: List[float] = []
        self._row_idx: List[List[int]] = []
        self._row_val: List[List[float]] = []
        self._row_lo: List[float] = []
        self._row_hi: List[float] = []
        self._row_names: List[str] = []
        self._finalized = False
        self._solve_seconds = 0.0

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the backend name"""
        pass

    @property
    @abstractmethod
    def supports_reduced_costs(self) -> bool:
        """Whether LP solves populate reduced costs"""
        pass

    # -- building -----------------------------------------------------

    def add_variable(self, kind: VarKind, lo: float, hi: float, objective: float = 0.0, name: str = "") -> VarRef:
        """
        Add a column.

        Raises:
            ModelFinalizedError: the model was already solved
            InvalidBoundsError: lo > hi, or binary bounds outside [0, 1]
        """
        if self._finalized:
            raise ModelFinalizedError("model is finalized; no new variables")
        lo, hi = float(lo), float(hi)
        if lo > hi:
            raise InvalidBoundsError(f"{name or 'variable'}: lo {lo} > hi {hi}")
        if kind != VarKind.CONTINUOUS and not (0.0 <= lo and hi <= 1.0):
            raise InvalidBoundsError(f"{name or 'variable'}: {kind.value} bounds [{lo}, {hi}] outside [0, 1]")
        ref = VarRef(index=len(self._kind), kind=kind, lo=lo, hi=hi, name=name or f"v{len(self._kind)}", owner=id(self))
        self._kind.append(kind)
        self._names.append(ref.name)
        self._cost.append(float(objective))
        self._lo.append(lo)
        self._hi.append(hi)
        self._orig_lo.append(lo)
        self._orig_hi.append(hi)
        return ref

    def _check_ref(self, v: VarRef) -> None:
        if not isinstance(v, VarRef) or v.owner != id(self) or not 0 <= v.index < len(self._kind):
            raise UnknownVariableError(f"unknown variable {v!r}")

    def add_linear_constraint(
        self,
        terms: Iterable[Tuple[VarRef, float]],
        sense: Sense,
        rhs: float,
        name: str = ""
    ) -> ConstraintRef:
        """
        Add a row sum(coef * var) sense rhs; repeated variables are merged.

        Raises:
            ModelFinalizedError: the model was already solved
            UnknownVariableError: a term refers to another model's variable
        """
        if self._finalized:
            raise ModelFinalizedError("model is finalized; no new constraints")
        merged: Dict[int, float] = {}
        for v, coef in terms:
            self._check_ref(v)
            merged[v.index] = merged.get(v.index, 0.0) + float(coef)
        rhs = float(rhs)
        lo = rhs if sense in (Sense.EQ, Sense.GE) else float("-inf")
        hi = rhs if sense in (Sense.EQ, Sense.LE) else float("inf")
        ref = ConstraintRef(index=len(self._row_lo), name=name or f"r{len(self._row_lo)}")
        self._row_idx.append(list(merged))
        self._row_val.append(list(merged.values()))
        self._row_lo.append(lo)
        self._row_hi.append(hi)
        self._row_names.append(ref.name)
        return ref

    def finalize(self) -> None:
        self._finalized = True

    # -- bounds -------------------------------------------------------

    def fix_variable(self, v: VarRef, value: float) -> None:
        """
        Tighten a variable's bounds to [value, value].

        Raises:
            InvalidBoundsError: value outside the original bounds
        """
        self._check_ref(v)
        value = float(value)
        if not self._orig_lo[v.index] <= value <= self._orig_hi[v.index]:
            raise InvalidBoundsError(
                f"{v.name}: value {value} outside original bounds [{self._orig_lo[v.index]}, {self._orig_hi[v.index]}]"
            )
        self._lo[v.index] = value
        self._hi[v.index] = value

    def release_variable(self, v: VarRef) -> None:
        """Restore a variable's original bounds"""
        self._check_ref(v)
        self._lo[v.index] = self._orig_lo[v.index]
        self._hi[v.index] = self._orig_hi[v.index]

    def bounds(self, v: VarRef) -> Tuple[float, float]:
        self._check_ref(v)
        return self._lo[v.index], self._hi[v.index]

    def is_fixed(self, v: VarRef) -> bool:
        lo, hi = self.bounds(v)
        return lo == hi

    def bound_vectors(self) -> Tuple[List[float], List[float]]:
        return list(self._lo), list(self._hi)

    # -- introspection ------------------------------------------------

    @property
    def num_variables(self) -> int:
        return len(self._kind)

    @property
    def num_constraints(self) -> int:
        return len(self._row_lo)

    def count_by_kind(self) -> Dict[VarKind, int]:
        counts = {kind: 0 for kind in VarKind}
        for kind in self._kind:
            counts[kind] += 1
        return counts

    @property
    def solve_seconds(self) -> float:
        """Accumulated wall clock spent inside solver runs"""
        return self._solve_seconds

    def as_assignment(self, warm_start: WarmStart) -> List[float]:
        """Turn a full warm start (list or VarRef mapping) into a value list"""
        if isinstance(warm_start, dict):
            values = [None] * self.num_variables
            for v, x in warm_start.items():
                self._check_ref(v)
                values[v.index] = float(x)
            missing = [self._names[i] for i, x in enumerate(values) if x is None]
            if missing:
                raise ValueError(f"warm start misses {len(missing)} variables, e.g. {missing[0]}")
            return values
        values = [float(x) for x in warm_start]
        if len(values) != self.num_variables:
            raise ValueError(f"warm start has {len(values)} values for {self.num_variables} variables")
        return values

    def check_feasible(self, values: Sequence[float], tol: float = 1e-6) -> List[str]:
        """Bound and row violations of an assignment under the current bounds"""
        problems = []
        for i, x in enumerate(values):
            if x < self._lo[i] - tol or x > self._hi[i] + tol:
                problems.append(f"{self._names[i]}={x} outside [{self._lo[i]}, {self._hi[i]}]")
        for r in range(self.num_constraints):
            activity = sum(c * values[j] for j, c in zip(self._row_idx[r], self._row_val[r]))
            if activity < self._row_lo[r] - tol or activity > self._row_hi[r] + tol:
                problems.append(f"{self._row_names[r]}: activity {activity} outside [{self._row_lo[r]}, {self._row_hi[r]}]")
        return problems

    # -- solving ------------------------------------------------------

    def solve_lp_relaxation(self, params: SolverParams) -> SolveOutcome:
        """Solve with every binary and implicit binary treated as continuous in its bounds"""
        self.finalize()
        outcome = self._solve(relax=True, params=params, warm_start=None)
        return self._record(outcome, "LP")

    def solve_mip(self, params: SolverParams, warm_start: Optional[WarmStart] = None) -> SolveOutcome:
        """Solve with binaries integral; implicit binaries stay continuous"""
        self.finalize()
        start = self.as_assignment(warm_start) if warm_start is not None else None
        outcome = self._solve(relax=False, params=params, warm_start=start)
        return self._record(outcome, "MIP")

    def _record(self, outcome: SolveOutcome, label: str) -> SolveOutcome:
        self._solve_seconds += outcome.wall_seconds
        if outcome.values is not None:
            # fixed columns report exactly their fixed value
            values = list(outcome.values)
            for i in range(self.num_variables):
                if self._lo[i] == self._hi[i]:
                    values[i] = self._lo[i]
            outcome = outcome.model_copy(update={"values": values})
        logger.debug(
            f"{self.name}: {label} {outcome.status.value} obj={outcome.objective_value} "
            f"bound={outcome.best_bound} nodes={outcome.node_count} in {outcome.wall_seconds:.3f}s"
        )
        return outcome

    @abstractmethod
    def _solve(self, relax: bool, params: SolverParams, warm_start: Optional[List[float]]) -> SolveOutcome:
        """Run the solver on the current model and bounds"""
        pass

    @abstractmethod
    def write_lp(self, path: Union[str, Path]) -> None:
        """Export the model in LP format with row and column names"""
        pass


def create_backend(name: Optional[str] = None) -> MilpBackend:
    """
    Create a backend by name, defaulting to the configured one.

    Raises:
        BackendError: unknown backend name
    """
    name = (name or get_settings().milp_backend).lower()
    if name == "highs":
        from app.services.highs_backend import HighsBackend
        return HighsBackend()
    raise BackendError(f"unknown MILP backend {name!r}")


def require_reduced_costs(backend: MilpBackend) -> None:
    """
    Raises:
        BackendCapabilityError: the backend cannot report reduced costs
    """
    if not backend.supports_reduced_costs:
        raise BackendCapabilityError(f"backend {backend.name} does not expose reduced costs")
