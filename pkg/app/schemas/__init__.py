"""
Schemas Package

This package contains Pydantic models for instances, solutions and
reports shared across the application.
"""

from app.schemas.models import (
    Station,
    ParkingSpace,
    Vehicle,
    Demand,
    Customer,
    DemandRef,
    Instance,
    check_instance,
    WATT_MINUTES_PER_KWH,
)
from app.schemas.solution import (
    T0,
    GridTime,
    Fulfillment,
    SchedulePoint,
    Solution,
    PlanEvent,
    PlanEventKind,
    AssignmentPlan,
    EnergyTrace,
)
from app.schemas.reports import (
    ValidationCheck,
    Violation,
    ValidationReport,
    RunStatus,
    RunReport,
    compute_gap,
)

__all__ = [
    "Station",
    "ParkingSpace",
    "Vehicle",
    "Demand",
    "Customer",
    "DemandRef",
    "Instance",
    "check_instance",
    "WATT_MINUTES_PER_KWH",
    "T0",
    "GridTime",
    "Fulfillment",
    "SchedulePoint",
    "Solution",
    "PlanEvent",
    "PlanEventKind",
    "AssignmentPlan",
    "EnergyTrace",
    "ValidationCheck",
    "Violation",
    "ValidationReport",
    "RunStatus",
    "RunReport",
    "compute_gap",
]
