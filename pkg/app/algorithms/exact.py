"""
Exact Algorithms

Parking-space variable fixing, reduced-cost fixing of the customer
variables, warm-start repair and the RCBVF algorithm that combines them
into an optimal solve of a smaller model.

Initially empty spaces of one class are interchangeable, so at every
instant only as many of them need to be usable as there are inter-station
arrivals so far (chargers first, then plain spaces). The rest have their
y, z_out and z_in variables fixed to zero.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel

from app.config import get_settings
from app.core.replay import Placements, compose_solution, placements_of, replay
from app.core.time_grid import TimeGrid, build_time_grid
from app.errors import IrreparableWarmStartError, SolverError, TraceInconsistencyError
from app.formulation.evsp3 import (
    ModelHandle,
    VariableRegistry,
    build_model,
    encode_solution,
    extract_solution,
)
from app.schemas.models import Instance
from app.schemas.reports import RunStatus
from app.schemas.solution import PlanEventKind, Solution
from app.services.milp_backend import SolverParams, SolveStatus, VarRef, require_reduced_costs
from app.algorithms.base import AlgorithmName, AlgorithmResult, SolveStrategy, run_status
from app.algorithms.heuristics import construct_greedy, fix_lp_zeros
from app.utils.logger import logger
from app.validation.validator import validate


# ===========================================
# Parking-space fixing
# ===========================================

def parking_fixings(inst: Instance, grid: TimeGrid, customers: Iterable[str]) -> Dict[str, List[Fraction]]:
    """
    Grid times at which each initially empty space can be switched off.

    Per station, with E / U the initially empty charger / plain spaces in id
    order and D' the inter-station arrivals of the given customers:
    k = min(|D'| - |E|, |U|); sweeping the station's times, the M arrivals at
    t remove min(|E|, M) spaces from E and, while k > 0, min(k, M) from U.
    Spaces still in E or U at t are fixed at t.

    Returns:
        space id -> ascending grid times to fix (spaces never fixed omitted)
    """
    chosen = set(customers)
    placement = inst.initial_placement
    arrivals: Dict[str, Dict[Fraction, int]] = {sid: {} for sid in inst.station_ids}
    for ref in inst.demand_refs:
        d = ref.demand
        if ref.customer_id in chosen and d.inter_station:
            counts = arrivals[d.dropoff_station]
            counts[d.arrive] = counts.get(d.arrive, 0) + 1

    fixings: Dict[str, List[Fraction]] = {}
    for sid in inst.station_ids:
        empty = [p for p in inst.spaces_by_station[sid] if p.id not in placement]
        chargers = [p.id for p in empty if p.has_charger]
        plain = [p.id for p in empty if not p.has_charger]
        total = sum(arrivals[sid].values())
        k = min(total - len(chargers), len(plain))
        for t in grid.station_times[sid]:
            m = arrivals[sid].get(t, 0)
            del chargers[:min(len(chargers), m)]
            if k > 0:
                n = min(k, m)
                del plain[:n]
                k -= n
            for space in chargers + plain:
                fixings.setdefault(space, []).append(t)
    return fixings


@dataclass
class FixingLedger:
    """
    Fixings applied to one model, grouped so each group can be released.

    Releasing restores the variables' original bounds, so a variable is
    recorded in at most one group.
    """
    handle: ModelHandle
    registry: VariableRegistry
    parking: Dict[Tuple[str, str, Fraction], VarRef] = field(default_factory=dict)
    lp_zero: List[VarRef] = field(default_factory=list)
    customers: Dict[str, int] = field(default_factory=dict)

    @property
    def backend(self):
        return self.handle.backend

    def fix_parking(self, fixings: Dict[str, List[Fraction]]) -> int:
        reg = self.registry
        for space, times in fixings.items():
            for t in times:
                for family, refs in (("y", reg.y), ("z_out", reg.z_out), ("z_in", reg.z_in)):
                    v = refs.get((space, t))
                    if v is None or self.backend.is_fixed(v):
                        continue
                    self.backend.fix_variable(v, 0.0)
                    self.parking[(family, space, t)] = v
        return len(self.parking)

    def release_parking(self) -> None:
        for v in self.parking.values():
            self.backend.release_variable(v)
        self.parking.clear()

    def record_lp_zeros(self, refs: List[VarRef]) -> None:
        self.lp_zero.extend(refs)

    def release_lp_zeros(self) -> None:
        for v in self.lp_zero:
            self.backend.release_variable(v)
        self.lp_zero.clear()

    def fix_customer(self, customer_id: str, value: int) -> None:
        self.backend.fix_variable(self.registry.w[customer_id], float(value))
        self.customers[customer_id] = value

    def customer_fixed(self, customer_id: str) -> Optional[int]:
        return self.customers.get(customer_id)

    def y_fixed(self, space: str, t: Fraction) -> bool:
        return ("y", space, t) in self.parking

    def z_in_fixed(self, space: str, t: Fraction) -> bool:
        return ("z_in", space, t) in self.parking

    def z_out_fixed(self, space: str, t: Fraction) -> bool:
        return ("z_out", space, t) in self.parking

    def space_usable(self, space: str, t: Fraction) -> bool:
        """Whether a vehicle may be dropped at the space at t"""
        return not (self.y_fixed(space, t) or self.z_in_fixed(space, t))

    def counts(self) -> Dict[str, int]:
        return {
            "parking": len(self.parking),
            "lp_zero": len(self.lp_zero),
            "w_zero": sum(1 for v in self.customers.values() if v == 0),
            "w_one": sum(1 for v in self.customers.values() if v == 1),
        }

    def to_text(self) -> str:
        """Export as plain text"""
        c = self.counts()
        lines = [
            f"parking fixings: {c['parking']}",
            f"lp-zero fixings: {c['lp_zero']}",
            f"w fixed to 0: {c['w_zero']}, to 1: {c['w_one']}",
        ]
        for cid in sorted(self.customers):
            lines.append(f"  w[{cid}] = {self.customers[cid]}")
        by_space: Dict[str, List[str]] = {}
        for family, space, t in sorted(self.parking, key=lambda k: (k[1], k[2], k[0])):
            by_space.setdefault(space, []).append(f"{family}@{t}")
        for space in sorted(by_space):
            lines.append(f"  {space}: {' '.join(by_space[space])}")
        return "\n".join(lines)


def fix_parking_spaces(inst: Instance, customers: Iterable[str], ledger: FixingLedger) -> int:
    """
    Apply parking-space fixings for a customer set to the ledger's model.

    Returns:
        Number of parking fixings held by the ledger afterwards
    """
    fixings = parking_fixings(inst, ledger.handle.grid, customers)
    count = ledger.fix_parking(fixings)
    logger.info(f"parking fixing: {count} y/z variables fixed to zero on {len(fixings)} spaces")
    return count


# ===========================================
# Reduced-cost fixing
# ===========================================

def reduced_cost_fix(
    lp_bound: float,
    incumbent: float,
    reduced_costs: Dict[str, float],
    margin: Optional[float] = None,
) -> Dict[str, int]:
    """
    Customers whose w is 1 (or 0) in every optimal solution.

    With gap = lp_bound - incumbent and delta = margin * max(1, |lp_bound|):
    w_c = 1 when r_c > gap + delta, w_c = 0 when -r_c > gap + delta.

    Returns:
        customer id -> fixed value; free customers omitted
    """
    margin = get_settings().reduced_cost_margin if margin is None else margin
    threshold = (lp_bound - incumbent) + margin * max(1.0, abs(lp_bound))
    decisions: Dict[str, int] = {}
    for cid, r in reduced_costs.items():
        if r > threshold:
            decisions[cid] = 1
        elif -r > threshold:
            decisions[cid] = 0
    return decisions


# ===========================================
# Warm-start repair
# ===========================================

@dataclass
class _Stay:
    space: str
    start: Optional[Fraction]
    end: Optional[Fraction]
    arrival: Optional[str]
    departure: Optional[str]


def _stays(inst: Instance, grid: TimeGrid, placements: Placements) -> List[_Stay]:
    result = replay(inst, grid, placements)
    if result.broken:
        raise TraceInconsistencyError(result.broken[0])
    stays = []
    for events in result.plans.values():
        for i, e in enumerate(events):
            if e.kind != PlanEventKind.STAY:
                continue
            arrival = events[i - 1].demand if i > 0 else None
            departure = events[i + 1].demand if i + 1 < len(events) else None
            stays.append(_Stay(e.space, e.start, e.end, arrival, departure))
    return stays


def _blocked(stay: _Stay, space: str, grid: TimeGrid, ledger: FixingLedger) -> bool:
    if stay.start is not None and ledger.z_in_fixed(space, stay.start):
        return True
    if stay.end is not None and ledger.z_out_fixed(space, stay.end):
        return True
    for t in grid.times(space):
        if (stay.start is None or t >= stay.start) and (stay.end is None or t < stay.end):
            if ledger.y_fixed(space, t):
                return True
    return False


def _overlap(a: _Stay, b: _Stay) -> bool:
    # closed intervals; a space vacated at t cannot be refilled at t
    first = a.end is None or b.start is None or b.start <= a.end
    second = b.end is None or a.start is None or a.start <= b.end
    return first and second


def repair_warm_start(inst: Instance, sol: Solution, ledger: FixingLedger) -> Solution:
    """
    Move stays off zero-fixed spaces.

    Every stay whose space has a fixed variable during the stay is moved to a
    space at the same station that is not fixed and free for the whole stay:
    a plain-space stay prefers another plain space, then a charger space; a
    charger stay only takes a charger space. Energies are recomputed by
    replay.

    Raises:
        IrreparableWarmStartError: a served customer has w fixed to zero, a
            customer fixed to one is not served, no compatible space exists,
            or the repaired solution fails validation
    """
    grid = ledger.handle.grid
    served = set(sol.served)
    for cid, value in ledger.customers.items():
        if value == 0 and cid in served:
            raise IrreparableWarmStartError(f"warm start serves {cid}, whose w is fixed to 0")
        if value == 1 and cid not in served:
            raise IrreparableWarmStartError(f"warm start does not serve {cid}, whose w is fixed to 1")

    placements = placements_of(sol)
    try:
        stays = _stays(inst, grid, placements)
    except TraceInconsistencyError as e:
        raise IrreparableWarmStartError(str(e)) from e

    blocked = [s for s in stays if _blocked(s, s.space, grid, ledger)]
    if not blocked:
        return sol

    for stay in blocked:
        home = inst.space_map[stay.space]
        options = [p for p in inst.spaces_by_station[home.station] if p.id != stay.space]
        if home.has_charger:
            options = [p for p in options if p.has_charger]
        options.sort(key=lambda p: (p.has_charger != home.has_charger, p.id))
        target = None
        for p in options:
            if _blocked(stay, p.id, grid, ledger):
                continue
            if any(other.space == p.id and other is not stay and _overlap(stay, other) for other in stays):
                continue
            target = p.id
            break
        if target is None:
            raise IrreparableWarmStartError(f"no usable space at {home.station} for the stay on {stay.space} from {stay.start}")
        logger.debug(f"repair: stay on {stay.space} [{stay.start}, {stay.end}) moved to {target}")
        stay.space = target
        if stay.arrival is not None:
            placements[stay.arrival] = (placements[stay.arrival][0], target)
        if stay.departure is not None:
            placements[stay.departure] = (target, placements[stay.departure][1])

    try:
        repaired = compose_solution(inst, grid, placements)
    except TraceInconsistencyError as e:
        raise IrreparableWarmStartError(str(e)) from e
    report = validate(inst, repaired, grid)
    if not report.ok:
        raise IrreparableWarmStartError(f"repaired warm start invalid: {report.violations[0].message}")
    logger.info(f"repair: moved {len(blocked)} stay(s) off fixed spaces")
    return repaired


# ===========================================
# RCBVF
# ===========================================

class RcbvfDiagnostics(BaseModel):
    """What one RCBVF run fixed and where its incumbent came from"""
    lp_bound: float
    incumbent_value: float
    incumbent_source: str
    parking_fixed_initial: int
    lp_zero_fixed: int
    w_fixed_zero: int
    w_fixed_one: int
    parking_fixed_final: int
    warm_start_used: bool
    warm_start_source: Optional[str] = None
    final_node_count: int = 0


class RcbvfStrategy(SolveStrategy):
    """
    Reduced-cost-based variable fixing.

    Args:
        maxrun_seconds: Time limit of the bounded solve that produces the
            incumbent for reduced-cost fixing (settings default)
    """

    def __init__(self, maxrun_seconds: Optional[float] = None):
        self.maxrun_seconds = maxrun_seconds

    @property
    def name(self) -> AlgorithmName:
        return AlgorithmName.RCBVF

    def run(self, inst: Instance, params: SolverParams) -> AlgorithmResult:
        began = time.perf_counter()
        maxrun = self.maxrun_seconds or get_settings().maxrun_seconds
        grid = build_time_grid(inst)
        handle, reg = build_model(inst, relax_implicit=True, grid=grid)
        backend = handle.backend
        require_reduced_costs(backend)
        ledger = FixingLedger(handle=handle, registry=reg)

        logger.info(f"RCBVF step 1: parking fixing with all {len(inst.customers)} customers")
        parking_initial = fix_parking_spaces(inst, inst.customer_ids, ledger)

        logger.info("RCBVF step 2: LP relaxation (dual simplex)")
        lp = backend.solve_lp_relaxation(params)
        if lp.status != SolveStatus.OPTIMAL or lp.reduced_costs is None:
            raise SolverError(f"LP relaxation ended with {lp.status.value} without reduced costs")
        lp_bound = lp.objective_value
        reduced = {cid: lp.reduced_cost(v) for cid, v in reg.w.items()}

        zeros = fix_lp_zeros(handle, reg, lp)
        ledger.record_lp_zeros(zeros)
        logger.info(f"RCBVF step 3: fixed {len(zeros)} assignment variables with LP value zero")

        bounded_limit = min(maxrun, params.time_limit_seconds)
        logger.info(f"RCBVF step 4: bounded solve for at most {bounded_limit}s")
        bounded = backend.solve_mip(params.with_time_limit(bounded_limit))
        if bounded.has_solution:
            incumbent = extract_solution(inst, reg, bounded, grid)
            source = "bounded-solve"
        else:
            logger.warning(f"RCBVF step 4: bounded solve gave no incumbent ({bounded.status.value}); using greedy")
            incumbent = construct_greedy(inst, grid)
            source = "greedy"
        incumbent_value = float(incumbent.objective)

        decisions = reduced_cost_fix(lp_bound, incumbent_value, reduced)
        for cid, value in sorted(decisions.items()):
            ledger.fix_customer(cid, value)
        counts = ledger.counts()
        logger.info(
            f"RCBVF step 5: gap {lp_bound - incumbent_value:.4f}; "
            f"w fixed to 0: {counts['w_zero']}, to 1: {counts['w_one']}"
        )

        ledger.release_lp_zeros()
        remaining = [c for c in inst.customer_ids if ledger.customer_fixed(c) != 0]
        ledger.release_parking()
        logger.info(f"RCBVF step 6: parking fixing with {len(remaining)} remaining customers")
        parking_final = fix_parking_spaces(inst, remaining, ledger)

        warm, warm_source, warm_solution = self._warm_start(inst, reg, ledger, incumbent)

        elapsed = time.perf_counter() - began
        final_limit = max(1.0, params.time_limit_seconds - elapsed)
        logger.info(f"RCBVF step 8: final solve ({final_limit:.0f}s left)")
        final = backend.solve_mip(params.with_time_limit(final_limit), warm_start=warm)

        if final.has_solution:
            sol = extract_solution(inst, reg, final, grid)
            status = run_status(final)
        elif warm is not None:
            logger.warning(f"RCBVF: final solve gave no incumbent ({final.status.value}); returning the warm start")
            sol = warm_solution
            status = RunStatus.FEASIBLE
        else:
            sol = None
            status = run_status(final)

        diagnostics = RcbvfDiagnostics(
            lp_bound=lp_bound,
            incumbent_value=incumbent_value,
            incumbent_source=source,
            parking_fixed_initial=parking_initial,
            lp_zero_fixed=len(zeros),
            w_fixed_zero=counts["w_zero"],
            w_fixed_one=counts["w_one"],
            parking_fixed_final=parking_final,
            warm_start_used=warm is not None,
            warm_start_source=warm_source,
            final_node_count=final.node_count,
        )
        return self.result(
            inst,
            status,
            sol,
            handle,
            best_bound=final.best_bound,
            node_count=bounded.node_count + final.node_count,
            diagnostics=diagnostics.model_dump(),
            ledger_text=ledger.to_text(),
        )

    def _warm_start(self, inst: Instance, reg: VariableRegistry, ledger: FixingLedger, incumbent: Solution):
        """Repair the incumbent, else a restricted greedy, else nothing"""
        backend = ledger.backend
        candidates = []
        try:
            candidates.append(("repaired", repair_warm_start(inst, incumbent, ledger)))
        except IrreparableWarmStartError as e:
            logger.warning(f"RCBVF step 7: incumbent irreparable ({e}); trying restricted greedy")
        excluded = [c for c, v in ledger.customers.items() if v == 0]
        required = [c for c, v in ledger.customers.items() if v == 1]
        candidates.append(("greedy", construct_greedy(
            inst,
            ledger.handle.grid,
            allowed_spaces=ledger.space_usable,
            excluded=excluded,
            prioritized=required,
        )))

        for source, sol in candidates:
            values = encode_solution(inst, reg, sol)
            problems = backend.check_feasible(backend.as_assignment(values))
            if not problems:
                logger.info(f"RCBVF step 7: warm start from {source} solution, objective {sol.objective}")
                return values, source, sol
            logger.debug(f"RCBVF: {source} warm start violates {problems[0]}")
        logger.warning("RCBVF step 7: no warm start consistent with the fixings; solving without one")
        return None, None, None


def rcbvf(inst: Instance, params: Optional[SolverParams] = None, maxrun_seconds: Optional[float] = None) -> Solution:
    """Run RCBVF and return its (optimal) solution"""
    return RcbvfStrategy(maxrun_seconds).run(inst, params or SolverParams.from_settings()).solution
