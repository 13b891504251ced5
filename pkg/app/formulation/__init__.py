"""
Formulation Package

The EVSP3 energy-flow MILP: model building, solution extraction and
warm-start encoding.
"""

from app.formulation.evsp3 import (
    ROW_FAMILIES,
    VariableRegistry,
    ModelHandle,
    ModelStats,
    build_model,
    extract_solution,
    encode_solution,
    parked_assignment,
)

__all__ = [
    "ROW_FAMILIES",
    "VariableRegistry",
    "ModelHandle",
    "ModelStats",
    "build_model",
    "extract_solution",
    "encode_solution",
    "parked_assignment",
]
