"""
Services Package

This package contains the solver integrations:
- MilpBackend: the backend-neutral model and solve interface
- HighsBackend: the HiGHS implementation
"""

from app.services.milp_backend import (
    MilpBackend,
    VarKind,
    VarRef,
    Sense,
    ConstraintRef,
    SolveStatus,
    SolveOutcome,
    SolverParams,
    CutSetting,
    FocusSetting,
    LpMethod,
    create_backend,
    require_reduced_costs,
)

__all__ = [
    "MilpBackend",
    "VarKind",
    "VarRef",
    "Sense",
    "ConstraintRef",
    "SolveStatus",
    "SolveOutcome",
    "SolverParams",
    "CutSetting",
    "FocusSetting",
    "LpMethod",
    "create_backend",
    "require_reduced_costs",
]
