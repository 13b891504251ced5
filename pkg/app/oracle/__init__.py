"""
Oracle Package

Exhaustive exact solving of tiny instances and the search for
non-monotone instances.
"""

from app.oracle.exhaustive import (
    OracleLimits,
    OracleResult,
    NonmonotoneWitness,
    solve_exhaustive,
    subset_placements,
    find_nonmonotone_witness,
)

__all__ = [
    "OracleLimits",
    "OracleResult",
    "NonmonotoneWitness",
    "solve_exhaustive",
    "subset_placements",
    "find_nonmonotone_witness",
]
