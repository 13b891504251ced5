"""
Report Models Module

Validation reports and benchmark run reports, with text and flat-row
exports for the CLI and CSV writers.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


# ===========================================
# Validation
# ===========================================

class ValidationCheck(str, Enum):
    """Independent feasibility checks of a solution"""
    ALL_OR_NOTHING = "a:all-or-nothing"
    PICKUP_ENERGY = "b:pickup-energy"
    DROPOFF_FREE = "c:dropoff-free"
    OCCUPANCY = "d:occupancy"
    ENERGY_CAP = "e:energy-cap"
    INITIAL_STATE = "f:initial-state"
    OBJECTIVE = "g:objective"


class Violation(BaseModel):
    """One failed check"""
    check: ValidationCheck
    message: str


class ValidationReport(BaseModel):
    """Outcome of validating a solution against an instance"""
    instance: str
    ok: bool
    violations: List[Violation] = Field(default_factory=list)

    def failed_checks(self) -> List[ValidationCheck]:
        return sorted({v.check for v in self.violations}, key=lambda c: c.value)

    def to_text(self) -> str:
        """Export as plain text"""
        if self.ok:
            return f"{self.instance}: ok"
        lines = [f"{self.instance}: {len(self.violations)} violation(s)"]
        for v in self.violations:
            lines.append(f"  [{v.check.value}] {v.message}")
        return "\n".join(lines)


# ===========================================
# Benchmark runs
# ===========================================

class RunStatus(str, Enum):
    """Status of one benchmark run"""
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    NO_SOLUTION = "no-solution"
    ERROR = "error"


def compute_gap(upper_bound: Optional[float], lower_bound: Optional[float]) -> Optional[float]:
    """
    Optimality gap ((UB - LB) / LB) * 100.

    Returns None when either bound is missing or LB = 0.
    """
    if upper_bound is None or lower_bound is None or lower_bound == 0:
        return None
    return (upper_bound - lower_bound) / lower_bound * 100.0


class RunReport(BaseModel):
    """One row of a benchmark CSV"""
    instance: str
    algorithm: str
    status: RunStatus
    objective: Optional[float] = Field(default=None, description="Incumbent value (LB)")
    best_bound: Optional[float] = Field(default=None, description="Best bound (UB)")
    gap_percent: Optional[float] = None
    gap_undefined: bool = False
    solve_seconds: float = Field(default=0.0, description="Wall clock inside backend solves")
    total_seconds: float = Field(default=0.0, description="Wall clock of the whole run")
    node_count: int = 0
    n_binary: int = 0
    n_implicit: int = 0
    n_continuous: int = 0
    n_rows: int = 0
    valid: Optional[bool] = None
    time_limit_seconds: float = 3600.0
    threads: int = 1
    cuts: str = "default"
    focus: str = "default"
    error: Optional[str] = None

    @classmethod
    def from_bounds(cls, **data: Any) -> "RunReport":
        """Build a report and derive the gap columns from the bounds"""
        report = cls(**data)
        if report.status in (RunStatus.OPTIMAL, RunStatus.FEASIBLE):
            gap = compute_gap(report.best_bound, report.objective)
            report.gap_percent = gap
            report.gap_undefined = gap is None
        return report

    def to_row(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


CSV_COLUMNS = list(RunReport.model_fields)
