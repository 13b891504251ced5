"""
Solution Models Module

Pydantic models for solutions, per-vehicle assignment plans and energy
traces. Energies in a Solution are watt-minute floats as produced by the
solver; times stay exact.
"""

from enum import Enum
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import Dict, List, Optional, Tuple, Union

from pydantic import Field

from app.schemas.models import FrozenModel, Rational


@total_ordering
class InitialInstant:
    """The sentinel t0, strictly earlier than every demand time"""
    __slots__ = ()

    def __lt__(self, other: object) -> bool:
        return not isinstance(other, InitialInstant)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, InitialInstant)

    def __hash__(self) -> int:
        return hash("t0")

    def __repr__(self) -> str:
        return "t0"


T0 = InitialInstant()

GridTime = Union[InitialInstant, Fraction]


def format_time(t: GridTime) -> str:
    if isinstance(t, InitialInstant):
        return "t0"
    return str(t)


# ===========================================
# Solution
# ===========================================

class Fulfillment(FrozenModel):
    """How one demand is fulfilled"""
    demand: str = Field(description="Demand key <customer>#<index>")
    pickup_space: str
    dropoff_space: str
    outgoing_energy: float = Field(description="Energy leaving the pick-up space (W·min)")
    incoming_energy: float = Field(description="Energy arriving at the drop-off space (W·min)")


class SchedulePoint(FrozenModel):
    """Occupancy and stored energy of one space at one grid time"""
    time: Optional[Rational] = Field(description="Grid time; null marks the initial instant t0")
    occupied: bool
    energy: float

    @property
    def grid_time(self) -> GridTime:
        return T0 if self.time is None else self.time


class Solution(FrozenModel):
    """
    A served-customer set with its fulfillments and per-space schedules.

    ``schedule`` maps each parking space id to its points in grid order,
    starting with the initial instant.
    """
    instance: str
    served: List[str]
    fulfillments: List[Fulfillment]
    schedule: Dict[str, List[SchedulePoint]]
    objective: Rational

    @cached_property
    def fulfillment_map(self) -> Dict[str, Fulfillment]:
        return {f.demand: f for f in self.fulfillments}

    @cached_property
    def occupancy(self) -> Dict[Tuple[str, GridTime], bool]:
        return {(p, pt.grid_time): pt.occupied for p, pts in self.schedule.items() for pt in pts}

    @cached_property
    def energies(self) -> Dict[Tuple[str, GridTime], float]:
        return {(p, pt.grid_time): pt.energy for p, pts in self.schedule.items() for pt in pts}


# ===========================================
# Assignment plans and energy traces
# ===========================================

class PlanEventKind(str, Enum):
    """Kinds of events in a vehicle's plan"""
    STAY = "stay"
    RENTAL = "rental"


class PlanEvent(FrozenModel):
    """
    One event of a vehicle's plan.

    A stay covers [start, end) on ``space``; ``start`` is null for the
    initial placement and ``end`` is null when the vehicle stays until the
    end of the horizon. A rental moves the vehicle from ``from_space`` to
    ``to_space`` over [start, end).
    """
    kind: PlanEventKind
    start: Optional[Rational] = None
    end: Optional[Rational] = None
    space: Optional[str] = None
    charging: bool = False
    demand: Optional[str] = None
    from_space: Optional[str] = None
    to_space: Optional[str] = None


class AssignmentPlan(FrozenModel):
    """Chronological events of one vehicle"""
    vehicle: str
    events: List[PlanEvent]

    @property
    def rentals(self) -> List[PlanEvent]:
        return [e for e in self.events if e.kind == PlanEventKind.RENTAL]

    def to_text(self) -> str:
        lines = [f"{self.vehicle}:"]
        for e in self.events:
            start = "t0" if e.start is None else str(e.start)
            if e.kind == PlanEventKind.STAY:
                end = "end" if e.end is None else str(e.end)
                mode = "charging" if e.charging else "parked"
                lines.append(f"  [{start}, {end}) {mode} at {e.space}")
            else:
                lines.append(f"  [{start}, {e.end}) rental {e.demand}: {e.from_space} -> {e.to_space}")
        return "\n".join(lines)


class EnergyTracePoint(FrozenModel):
    """Vehicle energy before and after one plan event"""
    event_index: int
    energy_before: Rational
    energy_after: Rational
    feasible: bool = True


class EnergyTrace(FrozenModel):
    """Energy replay of one assignment plan"""
    vehicle: str
    points: List[EnergyTracePoint]
    feasible: bool
    failed_at: Optional[int] = None
