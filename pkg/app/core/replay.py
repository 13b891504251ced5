"""
Fleet Replay

Chronological simulation of the fleet given, for each fulfilled demand,
its pick-up and drop-off space. Vehicles start from the placement psi,
charge at the maximum rate while parked on a charger (capped at L), and
move with every fulfilled demand. At one instant all arrivals are handled
before all departures, so a vehicle dropped off at t can leave again at t,
while a space vacated at t cannot be refilled at t.

The replay is the single source of truth for vehicle identity: assignment
plans, greedy and repaired solutions and the validator's re-derivation all
come from here.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.core.objective import evaluate_objective
from app.core.time_grid import TimeGrid, build_time_grid
from app.errors import TraceInconsistencyError
from app.schemas.models import Instance
from app.schemas.reports import ValidationCheck, Violation
from app.schemas.solution import (
    T0,
    AssignmentPlan,
    Fulfillment,
    GridTime,
    PlanEvent,
    PlanEventKind,
    SchedulePoint,
    Solution,
)

# demand key -> (pickup space, dropoff space)
Placements = Dict[str, Tuple[str, str]]


@dataclass
class _Parked:
    vehicle: str
    energy: Fraction
    since: Optional[Fraction]


@dataclass
class ReplayResult:
    """Everything derived from one replay"""
    issues: List[Violation] = field(default_factory=list)
    broken: List[str] = field(default_factory=list)
    outgoing: Dict[str, Fraction] = field(default_factory=dict)
    incoming: Dict[str, Fraction] = field(default_factory=dict)
    occupancy: Dict[Tuple[str, GridTime], bool] = field(default_factory=dict)
    energies: Dict[Tuple[str, GridTime], Fraction] = field(default_factory=dict)
    plans: Dict[str, List[PlanEvent]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.issues


def _flag(result: ReplayResult, check: ValidationCheck, message: str, structural: bool = False) -> None:
    result.issues.append(Violation(check=check, message=message))
    if structural:
        result.broken.append(message)


def _charged(inst: Instance, grid: TimeGrid, space: str, parked: _Parked, t: Fraction) -> Fraction:
    if parked.since is None or not grid.space_charger[space]:
        return parked.energy
    return min(parked.energy + grid.charge_rate * (t - parked.since), inst.battery_capacity)


def replay(inst: Instance, grid: TimeGrid, placements: Placements) -> ReplayResult:
    """
    Replay a set of fulfillments from the initial state.

    Args:
        inst: Instance
        grid: Its time grid
        placements: demand key -> (pickup space, dropoff space)

    Returns:
        ReplayResult; problems are collected as violations of checks (b)
        and (c), never raised
    """
    result = ReplayResult()
    spaces = inst.space_map

    parked: Dict[str, _Parked] = {}
    open_stay: Dict[str, PlanEvent] = {}
    for space_id, vehicle_id in inst.initial_placement.items():
        vehicle = inst.vehicle_map[vehicle_id]
        parked[space_id] = _Parked(vehicle_id, vehicle.initial_energy, grid.first_time(spaces[space_id].station))
        result.plans[vehicle_id] = []
        open_stay[vehicle_id] = PlanEvent(
            kind=PlanEventKind.STAY, start=None, space=space_id, charging=spaces[space_id].has_charger
        )
    for vehicle in inst.vehicles:
        result.plans.setdefault(vehicle.id, [])

    for p in inst.parking_spaces:
        occupant = parked.get(p.id)
        result.occupancy[(p.id, T0)] = occupant is not None
        result.energies[(p.id, T0)] = occupant.energy if occupant else Fraction(0)

    arrivals: Dict[Fraction, List[str]] = {}
    departures: Dict[Fraction, List[str]] = {}
    for key in sorted(placements):
        d = inst.demand_map[key].demand
        pickup, dropoff = placements[key]
        if pickup not in spaces or spaces[pickup].station != d.pickup_station:
            _flag(result, ValidationCheck.PICKUP_ENERGY, f"{key}: pick-up space {pickup} is not at station {d.pickup_station}", structural=True)
            continue
        if dropoff not in spaces or spaces[dropoff].station != d.dropoff_station:
            _flag(result, ValidationCheck.DROPOFF_FREE, f"{key}: drop-off space {dropoff} is not at station {d.dropoff_station}", structural=True)
            continue
        departures.setdefault(d.depart, []).append(key)
        arrivals.setdefault(d.arrive, []).append(key)

    stations_at: Dict[Fraction, List[str]] = {}
    for sid, times in grid.station_times.items():
        for t in times:
            stations_at.setdefault(t, []).append(sid)

    in_transit: Dict[str, Tuple[str, Fraction]] = {}
    for t in grid.all_times:
        for key in arrivals.get(t, []):
            if key not in in_transit:
                continue
            vehicle_id, energy = in_transit.pop(key)
            dropoff = placements[key][1]
            if dropoff in parked:
                _flag(result, ValidationCheck.DROPOFF_FREE, f"{key}: drop-off space {dropoff} is occupied at {t}", structural=True)
                continue
            parked[dropoff] = _Parked(vehicle_id, energy, t)
            open_stay[vehicle_id] = PlanEvent(
                kind=PlanEventKind.STAY, start=t, space=dropoff, charging=spaces[dropoff].has_charger
            )

        for key in departures.get(t, []):
            pickup, dropoff = placements[key]
            d = inst.demand_map[key].demand
            occupant = parked.pop(pickup, None)
            if occupant is None:
                _flag(result, ValidationCheck.PICKUP_ENERGY, f"{key}: no vehicle at pick-up space {pickup} at {t}", structural=True)
                continue
            energy = _charged(inst, grid, pickup, occupant, t)
            if energy < d.energy:
                _flag(result, ValidationCheck.PICKUP_ENERGY, f"{key}: vehicle {occupant.vehicle} holds {energy} W·min < {d.energy} W·min at {t}")
            result.outgoing[key] = energy
            result.incoming[key] = energy - d.energy
            in_transit[key] = (occupant.vehicle, energy - d.energy)

            stay = open_stay.pop(occupant.vehicle)
            result.plans[occupant.vehicle].append(stay.model_copy(update={"end": t}))
            result.plans[occupant.vehicle].append(PlanEvent(
                kind=PlanEventKind.RENTAL, start=t, end=d.arrive, demand=key, from_space=pickup, to_space=dropoff
            ))

        for sid in stations_at.get(t, ()):
            for p in inst.spaces_by_station[sid]:
                occupant = parked.get(p.id)
                result.occupancy[(p.id, t)] = occupant is not None
                result.energies[(p.id, t)] = _charged(inst, grid, p.id, occupant, t) if occupant else Fraction(0)

    for vehicle_id, stay in open_stay.items():
        result.plans[vehicle_id].append(stay)

    return result


def placements_of(sol: Solution) -> Placements:
    return {f.demand: (f.pickup_space, f.dropoff_space) for f in sol.fulfillments}


def compose_solution(inst: Instance, grid: TimeGrid, placements: Placements) -> Solution:
    """
    Build a full Solution from fulfillments by replaying them with maximal charging.

    Raises:
        TraceInconsistencyError: the fulfillments cannot be replayed
    """
    result = replay(inst, grid, placements)
    if not result.ok:
        raise TraceInconsistencyError("; ".join(v.message for v in result.issues[:3]))
    served = sorted({inst.demand_map[k].customer_id for k in placements})
    fulfillments = [
        Fulfillment(
            demand=k,
            pickup_space=placements[k][0],
            dropoff_space=placements[k][1],
            outgoing_energy=float(result.outgoing[k]),
            incoming_energy=float(result.incoming[k]),
        )
        for k in sorted(placements)
    ]
    return Solution(
        instance=inst.name,
        served=served,
        fulfillments=fulfillments,
        schedule=schedule_from(inst, grid, result.occupancy, result.energies),
        objective=evaluate_objective(inst, served),
    )


def schedule_from(inst: Instance, grid: TimeGrid, occupancy, energies) -> Dict[str, List[SchedulePoint]]:
    schedule = {}
    for p in inst.parking_spaces:
        schedule[p.id] = [
            SchedulePoint(
                time=None if t == T0 else t,
                occupied=bool(occupancy[(p.id, t)]),
                energy=float(energies[(p.id, t)]),
            )
            for t in grid.times0(p.id)
        ]
    return schedule


def extract_assignment_plans(inst: Instance, sol: Solution, grid: Optional[TimeGrid] = None) -> List[AssignmentPlan]:
    """
    Trace every vehicle from psi through the fulfillments of a solution.

    Raises:
        TraceInconsistencyError: a pick-up finds no vehicle or a drop-off finds
            its space occupied
    """
    grid = grid or build_time_grid(inst)
    result = replay(inst, grid, placements_of(sol))
    if result.broken:
        raise TraceInconsistencyError(result.broken[0])
    return [AssignmentPlan(vehicle=vid, events=result.plans[vid]) for vid in sorted(result.plans)]
