"""
EVSP3 Energy-Flow Model

Translates an Instance into the EVSP3 MILP and solver assignments back
into Solutions. Energies inside the model are in battery units (watt-minutes
divided by L) so that every coefficient is of order one; extraction scales
back to watt-minutes.

Rows are registered by family tag (see ROW_FAMILIES) and named like
``occupancy_flow[s1.p2,t=602]`` for LP exports.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel, Field

from app.config import get_settings
from app.core.objective import evaluate_objective
from app.core.replay import compose_solution
from app.core.time_grid import TimeGrid, build_time_grid
from app.errors import BackendError, IntegralityViolationError, TraceInconsistencyError
from app.schemas.models import Instance
from app.schemas.solution import T0, Fulfillment, GridTime, SchedulePoint, Solution, format_time
from app.services.milp_backend import (
    ConstraintRef,
    MilpBackend,
    Sense,
    SolveOutcome,
    VarKind,
    VarRef,
    create_backend,
)
from app.utils.logger import logger

SpaceTime = Tuple[str, GridTime]
DemandSpace = Tuple[str, str]

ROW_FAMILIES = (
    "pickup_serves",
    "dropoff_serves",
    "rental_energy",
    "pickup_energy",
    "dropoff_energy",
    "pickup_count",
    "dropoff_count",
    "dropoff_free",
    "occupancy_flow",
    "charge",
    "battery_cap",
    "initial_vehicle",
    "initial_empty",
)


@dataclass
class VariableRegistry:
    """
    Every model variable keyed by its symbol's indices.

    z_out / z_in only hold (p, t) pairs where some demand departs from /
    arrives at the station of p at t.
    """
    energy_unit: Fraction
    w: Dict[str, VarRef] = field(default_factory=dict)
    y: Dict[SpaceTime, VarRef] = field(default_factory=dict)
    ell: Dict[SpaceTime, VarRef] = field(default_factory=dict)
    x_out: Dict[DemandSpace, VarRef] = field(default_factory=dict)
    ell_out: Dict[DemandSpace, VarRef] = field(default_factory=dict)
    x_in: Dict[DemandSpace, VarRef] = field(default_factory=dict)
    ell_in: Dict[DemandSpace, VarRef] = field(default_factory=dict)
    z_out: Dict[SpaceTime, VarRef] = field(default_factory=dict)
    z_in: Dict[SpaceTime, VarRef] = field(default_factory=dict)

    def families(self) -> Dict[str, Dict]:
        return {
            "w": self.w,
            "y": self.y,
            "ell": self.ell,
            "x_out": self.x_out,
            "ell_out": self.ell_out,
            "x_in": self.x_in,
            "ell_in": self.ell_in,
            "z_out": self.z_out,
            "z_in": self.z_in,
        }

    def all_refs(self) -> Iterator[VarRef]:
        for family in self.families().values():
            yield from family.values()

    def assignment_refs(self) -> Iterator[VarRef]:
        """x_out, z_out, x_in and z_in: the variables fixed by LP values"""
        for family in (self.x_out, self.z_out, self.x_in, self.z_in):
            yield from family.values()


class ModelStats(BaseModel):
    """Size of a built model"""
    n_binary: int
    n_implicit: int
    n_continuous: int
    n_rows: int
    rows_by_family: Dict[str, int] = Field(default_factory=dict)


@dataclass
class ModelHandle:
    """The built MILP with its backend session and constraint registry"""
    backend: MilpBackend
    instance: Instance
    grid: TimeGrid
    relax_implicit: bool
    constraints: Dict[str, List[ConstraintRef]] = field(default_factory=dict)

    def stats(self) -> ModelStats:
        counts = self.backend.count_by_kind()
        return ModelStats(
            n_binary=counts[VarKind.BINARY],
            n_implicit=counts[VarKind.IMPLICIT_BINARY],
            n_continuous=counts[VarKind.CONTINUOUS],
            n_rows=self.backend.num_constraints,
            rows_by_family={tag: len(rows) for tag, rows in sorted(self.constraints.items())},
        )


class _Builder:
    """Accumulates rows under their family name"""

    def __init__(self, backend: MilpBackend):
        self.backend = backend
        self.constraints: Dict[str, List[ConstraintRef]] = {}

    def row(self, tag: str, label: str, terms, sense: Sense, rhs: float) -> None:
        ref = self.backend.add_linear_constraint(terms, sense, rhs, name=f"{tag}[{label}]")
        self.constraints.setdefault(tag, []).append(ref)


def build_model(
    inst: Instance,
    relax_implicit: bool = True,
    backend: Optional[MilpBackend] = None,
    grid: Optional[TimeGrid] = None,
) -> Tuple[ModelHandle, VariableRegistry]:
    """
    Build the EVSP3 model of an instance.

    Args:
        inst: Validated instance
        relax_implicit: Declare w, z and y implicit-binary instead of binary
        backend: Backend session to build into (a new configured one by default)
        grid: Precomputed time grid

    Returns:
        (ModelHandle, VariableRegistry)
    """
    grid = grid or build_time_grid(inst)
    backend = backend or create_backend()
    unit = inst.battery_capacity
    structural = VarKind.IMPLICIT_BINARY if relax_implicit else VarKind.BINARY
    reg = VariableRegistry(energy_unit=unit)
    b = _Builder(backend)

    def scaled(energy: Fraction) -> float:
        return float(energy / unit)

    departures_at: Dict[Tuple[str, Fraction], List[str]] = {}
    arrivals_at: Dict[Tuple[str, Fraction], List[str]] = {}
    for ref in inst.demand_refs:
        d = ref.demand
        departures_at.setdefault((d.pickup_station, d.depart), []).append(ref.key)
        arrivals_at.setdefault((d.dropoff_station, d.arrive), []).append(ref.key)

    # ----- variables -----
    for cid in inst.customer_ids:
        reg.w[cid] = backend.add_variable(
            structural, 0, 1, objective=float(inst.customer(cid).total_rental_time), name=f"w[{cid}]"
        )

    for p in inst.parking_spaces:
        for t in grid.times0(p.id):
            label = f"{p.id},t={format_time(t)}"
            reg.y[(p.id, t)] = backend.add_variable(structural, 0, 1, name=f"y[{label}]")
            reg.ell[(p.id, t)] = backend.add_variable(VarKind.CONTINUOUS, 0, 1, name=f"ell[{label}]")
        for t in grid.times(p.id):
            label = f"{p.id},t={format_time(t)}"
            if (p.station, t) in departures_at:
                reg.z_out[(p.id, t)] = backend.add_variable(structural, 0, 1, name=f"z_out[{label}]")
            if (p.station, t) in arrivals_at:
                reg.z_in[(p.id, t)] = backend.add_variable(structural, 0, 1, name=f"z_in[{label}]")

    for ref in inst.demand_refs:
        d = ref.demand
        for p in inst.spaces_by_station[d.pickup_station]:
            reg.x_out[(ref.key, p.id)] = backend.add_variable(VarKind.BINARY, 0, 1, name=f"x_out[{ref.key},{p.id}]")
            reg.ell_out[(ref.key, p.id)] = backend.add_variable(VarKind.CONTINUOUS, 0, 1, name=f"ell_out[{ref.key},{p.id}]")
        for p in inst.spaces_by_station[d.dropoff_station]:
            reg.x_in[(ref.key, p.id)] = backend.add_variable(VarKind.BINARY, 0, 1, name=f"x_in[{ref.key},{p.id}]")
            reg.ell_in[(ref.key, p.id)] = backend.add_variable(VarKind.CONTINUOUS, 0, 1, name=f"ell_in[{ref.key},{p.id}]")

    # ----- per demand: service, energy balance, energy bounds -----
    for ref in inst.demand_refs:
        d = ref.demand
        w = reg.w[ref.customer_id]
        outs = [p.id for p in inst.spaces_by_station[d.pickup_station]]
        ins = [p.id for p in inst.spaces_by_station[d.dropoff_station]]
        b.row("pickup_serves", ref.key, [(reg.x_out[(ref.key, p)], 1.0) for p in outs] + [(w, -1.0)], Sense.EQ, 0.0)
        b.row("dropoff_serves", ref.key, [(reg.x_in[(ref.key, p)], 1.0) for p in ins] + [(w, -1.0)], Sense.EQ, 0.0)
        b.row(
            "rental_energy",
            ref.key,
            [(reg.ell_out[(ref.key, p)], 1.0) for p in outs]
            + [(reg.ell_in[(ref.key, p)], -1.0) for p in ins]
            + [(w, -scaled(d.energy))],
            Sense.EQ,
            0.0,
        )
        for p in outs:
            b.row("pickup_energy", f"{ref.key},{p}", [(reg.ell_out[(ref.key, p)], 1.0), (reg.x_out[(ref.key, p)], -1.0)], Sense.LE, 0.0)
        for p in ins:
            b.row("dropoff_energy", f"{ref.key},{p}", [(reg.ell_in[(ref.key, p)], 1.0), (reg.x_in[(ref.key, p)], -(1.0 - scaled(d.energy)))], Sense.LE, 0.0)

    # ----- per space and grid time: aggregation, occupancy, charging -----
    for p in inst.parking_spaces:
        for t in grid.times(p.id):
            label = f"{p.id},t={format_time(t)}"
            before = grid.prev(p.id, t)
            leaving = departures_at.get((p.station, t), [])
            coming = arrivals_at.get((p.station, t), [])
            z_out = reg.z_out.get((p.id, t))
            z_in = reg.z_in.get((p.id, t))

            if z_out is not None:
                b.row("pickup_count", label, [(reg.x_out[(k, p.id)], 1.0) for k in leaving] + [(z_out, -1.0)], Sense.EQ, 0.0)
            if z_in is not None:
                b.row("dropoff_count", label, [(reg.x_in[(k, p.id)], 1.0) for k in coming] + [(z_in, -1.0)], Sense.EQ, 0.0)
                b.row("dropoff_free", label, [(z_in, 1.0), (reg.y[(p.id, before)], 1.0)], Sense.LE, 1.0)

            flow = [(reg.y[(p.id, t)], 1.0), (reg.y[(p.id, before)], -1.0)]
            if z_out is not None:
                flow.append((z_out, 1.0))
            if z_in is not None:
                flow.append((z_in, -1.0))
            b.row("occupancy_flow", label, flow, Sense.EQ, 0.0)

            lhs = (
                [(reg.ell_out[(k, p.id)], 1.0) for k in leaving]
                + [(reg.ell[(p.id, t)], 1.0)]
                + [(reg.ell_in[(k, p.id)], -1.0) for k in coming]
            )
            b.row("charge", label, lhs + [(reg.ell[(p.id, before)], -1.0)], Sense.LE, scaled(grid.increment(p.id, t)))
            b.row("battery_cap", label, lhs + [(reg.y[(p.id, before)], -1.0)], Sense.LE, 0.0)

    # ----- initial state -----
    placement = inst.initial_placement
    for p in inst.parking_spaces:
        y0, ell0 = reg.y[(p.id, T0)], reg.ell[(p.id, T0)]
        if p.id in placement:
            energy = inst.vehicle_map[placement[p.id]].initial_energy
            b.row("initial_vehicle", f"{p.id},y", [(y0, 1.0)], Sense.EQ, 1.0)
            b.row("initial_vehicle", f"{p.id},ell", [(ell0, 1.0)], Sense.EQ, scaled(energy))
        else:
            b.row("initial_empty", f"{p.id},y", [(y0, 1.0)], Sense.EQ, 0.0)
            b.row("initial_empty", f"{p.id},ell", [(ell0, 1.0)], Sense.EQ, 0.0)

    handle = ModelHandle(backend=backend, instance=inst, grid=grid, relax_implicit=relax_implicit, constraints=b.constraints)
    stats = handle.stats()
    logger.debug(
        f"EVSP3 model for {inst.name}: {stats.n_binary} binary, {stats.n_implicit} implicit, "
        f"{stats.n_continuous} continuous, {stats.n_rows} rows"
    )
    return handle, reg


# ===========================================
# Extraction
# ===========================================

def _check_integral(outcome: SolveOutcome, reg: VariableRegistry, tol: float) -> None:
    for name in ("w", "y", "z_out", "z_in", "x_out", "x_in"):
        for v in reg.families()[name].values():
            value = outcome.value(v)
            if abs(value - round(value)) > tol:
                raise IntegralityViolationError(f"{v.name} = {value} is not within {tol} of 0 or 1")


def _schedule_point(outcome: SolveOutcome, reg: VariableRegistry, space: str, t: GridTime, unit: float) -> SchedulePoint:
    # battery_cap bounds ell[p,t] by y[p,prev(t)], so a space just vacated may
    # keep energy nobody can draw; an empty space stores nothing
    occupied = outcome.value(reg.y[(space, t)]) >= 0.5
    energy = outcome.value(reg.ell[(space, t)]) * unit if occupied else 0.0
    return SchedulePoint(time=None if t == T0 else t, occupied=occupied, energy=energy)


def extract_solution(
    inst: Instance,
    reg: VariableRegistry,
    outcome: SolveOutcome,
    grid: Optional[TimeGrid] = None,
) -> Solution:
    """
    Read a Solution out of a solver assignment.

    Raises:
        BackendError: the outcome carries no assignment
        IntegralityViolationError: a binary or implicit binary is fractional
    """
    if not outcome.has_solution:
        raise BackendError(f"no incumbent to extract (status {outcome.status.value})")
    grid = grid or build_time_grid(inst)
    _check_integral(outcome, reg, get_settings().integrality_tolerance)
    unit = float(reg.energy_unit)

    served = sorted(c for c, v in reg.w.items() if outcome.value(v) >= 0.5)
    served_set = set(served)
    fulfillments = []
    for ref in inst.demand_refs:
        if ref.customer_id not in served_set:
            continue
        d = ref.demand
        pickups = [p.id for p in inst.spaces_by_station[d.pickup_station] if outcome.value(reg.x_out[(ref.key, p.id)]) >= 0.5]
        dropoffs = [p.id for p in inst.spaces_by_station[d.dropoff_station] if outcome.value(reg.x_in[(ref.key, p.id)]) >= 0.5]
        if len(pickups) != 1 or len(dropoffs) != 1:
            raise TraceInconsistencyError(f"{ref.key}: {len(pickups)} pick-up and {len(dropoffs)} drop-off spaces selected")
        outgoing = sum(outcome.value(reg.ell_out[(ref.key, p.id)]) for p in inst.spaces_by_station[d.pickup_station])
        incoming = sum(outcome.value(reg.ell_in[(ref.key, p.id)]) for p in inst.spaces_by_station[d.dropoff_station])
        fulfillments.append(Fulfillment(
            demand=ref.key,
            pickup_space=pickups[0],
            dropoff_space=dropoffs[0],
            outgoing_energy=outgoing * unit,
            incoming_energy=incoming * unit,
        ))

    schedule = {p.id: [_schedule_point(outcome, reg, p.id, t, unit) for t in grid.times0(p.id)] for p in inst.parking_spaces}
    return Solution(
        instance=inst.name,
        served=served,
        fulfillments=fulfillments,
        schedule=schedule,
        objective=evaluate_objective(inst, served),
    )


# ===========================================
# Warm starts
# ===========================================

def encode_solution(inst: Instance, reg: VariableRegistry, sol: Solution) -> Dict[VarRef, float]:
    """Full variable assignment representing a Solution"""
    unit = float(reg.energy_unit)
    values: Dict[VarRef, float] = {v: 0.0 for v in reg.all_refs()}
    served = set(sol.served)
    for cid, v in reg.w.items():
        values[v] = 1.0 if cid in served else 0.0
    for f in sol.fulfillments:
        d = inst.demand_map[f.demand].demand
        values[reg.x_out[(f.demand, f.pickup_space)]] = 1.0
        values[reg.ell_out[(f.demand, f.pickup_space)]] = f.outgoing_energy / unit
        values[reg.x_in[(f.demand, f.dropoff_space)]] = 1.0
        values[reg.ell_in[(f.demand, f.dropoff_space)]] = f.incoming_energy / unit
        values[reg.z_out[(f.pickup_space, d.depart)]] = 1.0
        values[reg.z_in[(f.dropoff_space, d.arrive)]] = 1.0
    for (p, t), v in reg.y.items():
        values[v] = 1.0 if sol.occupancy[(p, t)] else 0.0
    for (p, t), v in reg.ell.items():
        values[v] = sol.energies[(p, t)] / unit
    return values


def parked_assignment(inst: Instance, reg: VariableRegistry, grid: Optional[TimeGrid] = None) -> Dict[VarRef, float]:
    """The all-parked solution: nobody served, vehicles stay and charge where psi put them"""
    grid = grid or build_time_grid(inst)
    return encode_solution(inst, reg, compose_solution(inst, grid, {}))
