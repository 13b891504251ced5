"""
Orchestration Package

Batch runs of algorithms over instance files and the CSV tables built from
them.
"""

from app.orchestration.bench import (
    run_instance,
    run_batch,
    summarize,
    reports_frame,
    write_csv,
    performance_profile,
    write_profile,
    bound_gap_table,
    profile_params,
    run_settings_study,
)

__all__ = [
    "run_instance",
    "run_batch",
    "summarize",
    "reports_frame",
    "write_csv",
    "performance_profile",
    "write_profile",
    "bound_gap_table",
    "profile_params",
    "run_settings_study",
]
