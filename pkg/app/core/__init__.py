"""
Core Package

Instance and solution files, the time grid, objective evaluation and the
fleet replay shared by every other package.
"""

from app.core.instance_io import (
    load_instance,
    save_instance,
    load_solution,
    save_solution,
    instance_from_dict,
    instance_to_dict,
    dumps_instance,
)
from app.core.time_grid import TimeGrid, build_time_grid
from app.core.objective import evaluate_objective
from app.core.replay import (
    replay,
    compose_solution,
    extract_assignment_plans,
    placements_of,
)

__all__ = [
    "load_instance",
    "save_instance",
    "load_solution",
    "save_solution",
    "instance_from_dict",
    "instance_to_dict",
    "dumps_instance",
    "TimeGrid",
    "build_time_grid",
    "evaluate_objective",
    "replay",
    "compose_solution",
    "extract_assignment_plans",
    "placements_of",
]
