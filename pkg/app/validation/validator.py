"""
Solution Validator

Solver-independent audit of a Solution. Vehicle movements are re-derived by
replaying the fulfillments from the initial placement; the occupancy and
energy schedules stored in the Solution are cross-checked against that
replay and against the flow and charging rows, never trusted.

Checks:
    (a) all-or-nothing service
    (b) enough energy at every pick-up
    (c) drop-off space free just before the arrival
    (d) occupancy bookkeeping
    (e) charging cap on the energy of parked vehicles
    (f) initial state equals psi
    (g) objective equals the served rental time
"""

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.config import get_settings
from app.core.objective import evaluate_objective
from app.core.replay import placements_of, replay
from app.core.time_grid import TimeGrid, build_time_grid
from app.schemas.models import Instance, demand_key
from app.schemas.reports import ValidationCheck, ValidationReport, Violation
from app.schemas.solution import (
    T0,
    AssignmentPlan,
    EnergyTrace,
    EnergyTracePoint,
    PlanEventKind,
    Solution,
    format_time,
)
from app.utils.logger import logger


class _Audit:
    """Collects violations for one solution"""

    def __init__(self, inst: Instance, sol: Solution, grid: TimeGrid):
        self.inst = inst
        self.sol = sol
        self.grid = grid
        self.tol = get_settings().energy_tolerance * float(inst.battery_capacity)
        self.violations: List[Violation] = []

    def fail(self, check: ValidationCheck, message: str) -> None:
        self.violations.append(Violation(check=check, message=message))

    # ----- (a) -----
    def check_service(self) -> bool:
        inst, sol = self.inst, self.sol
        resolvable = True
        served = set(sol.served)
        for cid in sorted(served):
            if cid not in inst.customer_map:
                self.fail(ValidationCheck.ALL_OR_NOTHING, f"unknown customer {cid} marked served")
                resolvable = False
        if len(served) != len(sol.served):
            self.fail(ValidationCheck.ALL_OR_NOTHING, "served list contains duplicates")

        seen = set()
        for f in sol.fulfillments:
            if f.demand in seen:
                self.fail(ValidationCheck.ALL_OR_NOTHING, f"{f.demand} fulfilled twice")
            seen.add(f.demand)
            ref = inst.demand_map.get(f.demand)
            if ref is None:
                self.fail(ValidationCheck.ALL_OR_NOTHING, f"unknown demand {f.demand}")
                resolvable = False
                continue
            if f.pickup_space not in inst.space_map or f.dropoff_space not in inst.space_map:
                self.fail(ValidationCheck.ALL_OR_NOTHING, f"{f.demand} refers to an unknown parking space")
                resolvable = False
            if ref.customer_id not in served:
                self.fail(ValidationCheck.ALL_OR_NOTHING, f"{f.demand} fulfilled but customer {ref.customer_id} not served")

        for cid in sorted(served & set(inst.customer_map)):
            for i, _ in enumerate(inst.customer(cid).demands):
                key = demand_key(cid, i)
                if key not in seen:
                    self.fail(ValidationCheck.ALL_OR_NOTHING, f"customer {cid} served but {key} not fulfilled")
        return resolvable

    # ----- schedule shape -----
    def check_schedule_shape(self) -> bool:
        ok = True
        for p in self.inst.parking_spaces:
            points = self.sol.schedule.get(p.id)
            expected = list(self.grid.times0(p.id))
            if points is None or [pt.grid_time for pt in points] != expected:
                self.fail(ValidationCheck.OCCUPANCY, f"schedule of {p.id} does not cover its grid")
                ok = False
        extra = sorted(set(self.sol.schedule) - set(self.inst.space_map))
        for space in extra:
            self.fail(ValidationCheck.OCCUPANCY, f"schedule for unknown space {space}")
        return ok

    # ----- (f) -----
    def check_initial_state(self) -> None:
        placement = self.inst.initial_placement
        for p in self.inst.parking_spaces:
            occupied = self.sol.occupancy[(p.id, T0)]
            energy = self.sol.energies[(p.id, T0)]
            if p.id in placement:
                vehicle = self.inst.vehicle_map[placement[p.id]]
                if not occupied:
                    self.fail(ValidationCheck.INITIAL_STATE, f"{p.id} should hold {vehicle.id} at t0")
                if abs(energy - float(vehicle.initial_energy)) > self.tol:
                    self.fail(ValidationCheck.INITIAL_STATE, f"{p.id} starts with {energy} instead of {float(vehicle.initial_energy)}")
            elif occupied or abs(energy) > self.tol:
                self.fail(ValidationCheck.INITIAL_STATE, f"{p.id} should be empty at t0")

    # ----- (b) (c) (d) (e) on the stored numbers -----
    def check_rows(self, replayed_occupancy: Optional[Dict]) -> None:
        inst, sol, grid, tol = self.inst, self.sol, self.grid, self.tol
        L = float(inst.battery_capacity)

        leaving: Dict[Tuple[str, Fraction], List] = {}
        coming: Dict[Tuple[str, Fraction], List] = {}
        for f in sol.fulfillments:
            d = inst.demand_map[f.demand].demand
            eps = float(d.energy)
            leaving.setdefault((f.pickup_space, d.depart), []).append(f)
            coming.setdefault((f.dropoff_space, d.arrive), []).append(f)
            if f.outgoing_energy < eps - tol:
                self.fail(ValidationCheck.PICKUP_ENERGY, f"{f.demand} leaves with {f.outgoing_energy} < {eps}")
            if abs(f.outgoing_energy - f.incoming_energy - eps) > tol:
                self.fail(ValidationCheck.ENERGY_CAP, f"{f.demand} consumes {f.outgoing_energy - f.incoming_energy} instead of {eps}")
            if f.outgoing_energy > L + tol:
                self.fail(ValidationCheck.ENERGY_CAP, f"{f.demand} leaves with {f.outgoing_energy} above capacity {L}")

        for p in inst.parking_spaces:
            for t in grid.times(p.id):
                before = grid.prev(p.id, t)
                occ_prev = sol.occupancy[(p.id, before)]
                occ = sol.occupancy[(p.id, t)]
                outs = leaving.get((p.id, t), [])
                ins = coming.get((p.id, t), [])
                where = f"{p.id} at {format_time(t)}"

                if len(ins) > 1 or (ins and occ_prev):
                    self.fail(ValidationCheck.DROPOFF_FREE, f"drop-off into occupied {where}")
                if len(outs) > 1:
                    self.fail(ValidationCheck.PICKUP_ENERGY, f"{len(outs)} pick-ups from {where}")

                flow = int(occ) - int(occ_prev) + len(outs) - len(ins)
                if flow != 0:
                    self.fail(ValidationCheck.OCCUPANCY, f"occupancy flow broken at {where}")
                if replayed_occupancy is not None and replayed_occupancy[(p.id, t)] != occ:
                    self.fail(ValidationCheck.OCCUPANCY, f"schedule says occupied={occ} at {where}, replay disagrees")

                energy = sol.energies[(p.id, t)]
                energy_prev = sol.energies[(p.id, before)]
                net = sum(f.outgoing_energy for f in outs) + energy - sum(f.incoming_energy for f in ins)
                if net - energy_prev > float(grid.increment(p.id, t)) + tol:
                    self.fail(ValidationCheck.ENERGY_CAP, f"energy at {where} exceeds what charging allows")
                if net > L * occ_prev + tol:
                    self.fail(ValidationCheck.ENERGY_CAP, f"energy taken from {where} exceeds capacity of what was parked")
                # only a parked vehicle's energy is bounded; what an empty space
                # reports is unusable since the next row caps it by occupancy
                if energy < -tol or (occ and energy > L + tol):
                    self.fail(ValidationCheck.ENERGY_CAP, f"stored energy {energy} out of range at {where}")

    # ----- (g) -----
    def check_objective(self) -> None:
        expected = evaluate_objective(self.inst, [c for c in set(self.sol.served) if c in self.inst.customer_map])
        if self.sol.objective != expected:
            self.fail(ValidationCheck.OBJECTIVE, f"objective {self.sol.objective} but served rental time is {expected}")


def validate(inst: Instance, sol: Solution, grid: Optional[TimeGrid] = None) -> ValidationReport:
    """
    Audit a solution against an instance.

    Violations are reported, never raised. Checks that need resolvable ids or
    a complete schedule are skipped when those preconditions fail (the
    failure itself is reported).

    Args:
        inst: Instance the solution claims to solve
        sol: Solution to audit
        grid: Precomputed time grid

    Returns:
        ValidationReport
    """
    grid = grid or build_time_grid(inst)
    audit = _Audit(inst, sol, grid)

    resolvable = audit.check_service()
    audit.check_objective()
    if resolvable:
        result = replay(inst, grid, placements_of(sol))
        audit.violations.extend(result.issues)
        if audit.check_schedule_shape():
            audit.check_initial_state()
            audit.check_rows(None if result.broken else result.occupancy)

    report = ValidationReport(instance=inst.name, ok=not audit.violations, violations=audit.violations)
    if report.ok:
        logger.debug(f"validate {inst.name}: ok")
    else:
        logger.debug(f"validate {inst.name}: {len(report.violations)} violation(s) in {[c.value for c in report.failed_checks()]}")
    return report


def replay_energy(inst: Instance, plan: AssignmentPlan, grid: Optional[TimeGrid] = None) -> EnergyTrace:
    """
    Simulate the battery of one vehicle along its plan.

    Parked on a charger the battery gains mu per minute up to L, starting at
    the stay's start (the station's first grid time for the initial stay).
    Open stays charge until the last grid time of their station. Each rental
    subtracts its demand's energy; the trace stops at the first rental the
    battery cannot cover.

    Example:
        >>> plan = extract_assignment_plans(inst, sol)[0]
        >>> trace = replay_energy(inst, plan)
        >>> trace.feasible
        True
    """
    grid = grid or build_time_grid(inst)
    L = inst.battery_capacity
    energy = inst.vehicle_map[plan.vehicle].initial_energy
    points: List[EnergyTracePoint] = []

    for index, event in enumerate(plan.events):
        before = energy
        if event.kind == PlanEventKind.STAY:
            station = inst.space_map[event.space].station
            start = event.start if event.start is not None else grid.first_time(station)
            times = grid.station_times[station]
            end = event.end if event.end is not None else (times[-1] if times else None)
            if event.charging and start is not None and end is not None and end > start:
                energy = min(energy + inst.charge_rate * (end - start), L)
            points.append(EnergyTracePoint(event_index=index, energy_before=before, energy_after=energy))
            continue

        need = inst.demand_map[event.demand].demand.energy
        if energy < need:
            points.append(EnergyTracePoint(event_index=index, energy_before=before, energy_after=before, feasible=False))
            return EnergyTrace(vehicle=plan.vehicle, points=points, feasible=False, failed_at=index)
        energy = energy - need
        points.append(EnergyTracePoint(event_index=index, energy_before=before, energy_after=energy))

    return EnergyTrace(vehicle=plan.vehicle, points=points, feasible=True)
