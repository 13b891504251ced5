"""
Heuristics

construct_greedy builds a feasible solution without any solver: customers
are tried one at a time by decreasing total rental time and kept only if
all of their demands can be fulfilled together with those already kept.

LRBVF solves the LP relaxation, fixes to zero every assignment variable
(x_out, z_out, x_in, z_in) that is zero at the LP optimum and solves the
restricted model with integral x. The restricted model always contains the
all-parked solution, which is passed as warm start.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from app.config import get_settings
from app.core.replay import Placements, compose_solution
from app.core.time_grid import TimeGrid, build_time_grid
from app.errors import SolverError
from app.formulation.evsp3 import (
    ModelHandle,
    VariableRegistry,
    build_model,
    extract_solution,
    parked_assignment,
)
from app.schemas.models import Instance
from app.schemas.reports import RunStatus
from app.schemas.solution import Solution
from app.services.milp_backend import SolveOutcome, SolverParams, SolveStatus, VarRef
from app.algorithms.base import AlgorithmName, AlgorithmResult, SolveStrategy
from app.utils.logger import logger

# (space id, arrival time) -> may a vehicle be dropped there
SpaceFilter = Callable[[str, Fraction], bool]


# ===========================================
# Greedy construction
# ===========================================

@dataclass
class _Slot:
    vehicle: str
    energy: Fraction
    since: Optional[Fraction]


def _energy_at(inst: Instance, grid: TimeGrid, space: str, slot: _Slot, t: Fraction) -> Fraction:
    if slot.since is None or not grid.space_charger[space]:
        return slot.energy
    return min(slot.energy + inst.charge_rate * (t - slot.since), inst.battery_capacity)


def _simulate(
    inst: Instance,
    grid: TimeGrid,
    customers: Sequence[str],
    allowed: Optional[SpaceFilter],
) -> Optional[Placements]:
    """Greedy placements for all demands of the customers, or None if one fails"""
    keys = [ref.key for cid in customers for ref in inst.demand_refs if ref.customer_id == cid]
    arrivals: Dict[Fraction, List[str]] = {}
    departures: Dict[Fraction, List[str]] = {}
    for key in keys:
        d = inst.demand_map[key].demand
        departures.setdefault(d.depart, []).append(key)
        arrivals.setdefault(d.arrive, []).append(key)

    parked: Dict[str, _Slot] = {}
    for space_id, vehicle_id in inst.initial_placement.items():
        vehicle = inst.vehicle_map[vehicle_id]
        parked[space_id] = _Slot(vehicle_id, vehicle.initial_energy, grid.first_time(inst.space_map[space_id].station))

    placements: Placements = {}
    in_transit: Dict[str, _Slot] = {}
    for t in sorted(set(arrivals) | set(departures)):
        for key in sorted(arrivals.get(t, [])):
            d = inst.demand_map[key].demand
            free = [
                p for p in inst.spaces_by_station[d.dropoff_station]
                if p.id not in parked and (allowed is None or allowed(p.id, t))
            ]
            if not free:
                return None
            chosen = min(free, key=lambda p: (not p.has_charger, p.id))
            moving = in_transit.pop(key)
            parked[chosen.id] = _Slot(moving.vehicle, moving.energy, t)
            placements[key] = (placements[key][0], chosen.id)

        for key in sorted(departures.get(t, [])):
            d = inst.demand_map[key].demand
            candidates = []
            for p in inst.spaces_by_station[d.pickup_station]:
                slot = parked.get(p.id)
                if slot is None:
                    continue
                energy = _energy_at(inst, grid, p.id, slot, t)
                if energy >= d.energy:
                    candidates.append((-energy, slot.vehicle, p.id, energy))
            if not candidates:
                return None
            _, vehicle, space, energy = min(candidates)
            del parked[space]
            in_transit[key] = _Slot(vehicle, energy - d.energy, None)
            placements[key] = (space, "")
    return placements


def construct_greedy(
    inst: Instance,
    grid: Optional[TimeGrid] = None,
    allowed_spaces: Optional[SpaceFilter] = None,
    excluded: Iterable[str] = (),
    prioritized: Iterable[str] = (),
) -> Solution:
    """
    Build a feasible solution without solving any model.

    Customers are tried by decreasing total rental time (ties by id),
    prioritized customers first. A trial re-simulates every kept customer plus
    the candidate chronologically: at a drop-off the lowest-id free charger
    space is used, else the lowest-id free plain space; at a pick-up the parked
    vehicle with the most energy that covers the demand, ties by vehicle id.

    Args:
        inst: Validated instance
        grid: Precomputed time grid
        allowed_spaces: Optional filter on drop-off spaces at their arrival time
        excluded: Customers never tried
        prioritized: Customers tried before all others

    Returns:
        Validator-ok Solution; the empty solution in the worst case
    """
    grid = grid or build_time_grid(inst)
    skip = set(excluded)
    first = set(prioritized) - skip

    def rank(cid: str):
        return (cid not in first, -inst.customer(cid).total_rental_time, cid)

    kept: List[str] = []
    placements: Placements = {}
    for cid in sorted((c for c in inst.customer_ids if c not in skip), key=rank):
        trial = _simulate(inst, grid, kept + [cid], allowed_spaces)
        if trial is None:
            logger.debug(f"greedy: {cid} rejected")
            continue
        kept.append(cid)
        placements = trial

    sol = compose_solution(inst, grid, placements)
    logger.info(f"greedy: served {len(sol.served)}/{len(inst.customers)} customers, objective {sol.objective}")
    return sol


class GreedyStrategy(SolveStrategy):
    """construct_greedy as an algorithm"""

    @property
    def name(self) -> AlgorithmName:
        return AlgorithmName.GREEDY

    def run(self, inst: Instance, params: SolverParams) -> AlgorithmResult:
        sol = construct_greedy(inst)
        return self.result(inst, RunStatus.FEASIBLE, sol)


# ===========================================
# LRBVF
# ===========================================

def fix_lp_zeros(
    handle: ModelHandle,
    reg: VariableRegistry,
    lp: SolveOutcome,
    tol: Optional[float] = None,
) -> List[VarRef]:
    """
    Fix to zero every free assignment variable whose LP value is zero.

    Returns:
        The variables fixed by this call
    """
    tol = get_settings().zero_tolerance if tol is None else tol
    backend = handle.backend
    fixed = []
    for v in reg.assignment_refs():
        if backend.is_fixed(v):
            continue
        if lp.value(v) <= tol:
            backend.fix_variable(v, 0.0)
            fixed.append(v)
    return fixed


class LrbvfStrategy(SolveStrategy):
    """
    Linear relaxation-based variable fixing.

    The reported bound is the LP relaxation value, an upper bound for the
    unrestricted problem; the run is optimal only when the heuristic
    reaches it.
    """

    @property
    def name(self) -> AlgorithmName:
        return AlgorithmName.LRBVF

    def run(self, inst: Instance, params: SolverParams) -> AlgorithmResult:
        grid = build_time_grid(inst)
        handle, reg = build_model(inst, relax_implicit=True, grid=grid)
        backend = handle.backend

        logger.info(f"LRBVF step 1: LP relaxation of {inst.name}")
        lp = backend.solve_lp_relaxation(params)
        if lp.status != SolveStatus.OPTIMAL:
            raise SolverError(f"LP relaxation ended with {lp.status.value}")
        lp_bound = lp.objective_value

        fixed = fix_lp_zeros(handle, reg, lp)
        logger.info(f"LRBVF step 2: fixed {len(fixed)} of {sum(1 for _ in reg.assignment_refs())} assignment variables to zero")

        logger.info("LRBVF step 3: restricted MIP, warm-started with the parked solution")
        warm = parked_assignment(inst, reg, grid)
        mip = backend.solve_mip(params, warm_start=warm)
        if mip.has_solution:
            sol = extract_solution(inst, reg, mip, grid)
        else:
            logger.warning(f"LRBVF: restricted MIP returned no incumbent ({mip.status.value}); using the parked solution")
            sol = compose_solution(inst, grid, {})

        status = RunStatus.FEASIBLE
        if abs(float(sol.objective) - lp_bound) <= 1e-6 * max(1.0, abs(lp_bound)):
            status = RunStatus.OPTIMAL
        return self.result(
            inst,
            status,
            sol,
            handle,
            best_bound=lp_bound,
            node_count=mip.node_count,
            diagnostics={"lp_bound": lp_bound, "lp_zero_fixed": len(fixed), "mip_status": mip.status.value},
        )


def lrbvf(inst: Instance, params: Optional[SolverParams] = None) -> Solution:
    """Run LRBVF and return its solution"""
    return LrbvfStrategy().run(inst, params or SolverParams.from_settings()).solution
