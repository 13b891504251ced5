"""
Exhaustive Oracle

Brute-force exact solver for tiny instances. Customer subsets are tried by
decreasing value; a subset is feasible when a depth-first search over its
demands (chronological, arrivals before departures at one instant) finds
vehicles and drop-off spaces for all of them. Vehicles on a charger always
charge, which never removes a feasible behavior.

Branching is reduced by symmetry: at a drop-off only the lowest-id free
space of each class is tried, at a pick-up only one vehicle per
(energy, charger) pair.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.config import get_settings
from app.core.replay import Placements, compose_solution
from app.core.time_grid import TimeGrid, build_time_grid
from app.errors import SizeCapExceededError
from app.schemas.models import Instance, Rational
from app.schemas.solution import Solution
from app.utils.logger import logger


class OracleLimits(BaseModel):
    """Size caps of the oracle"""
    max_customers: int = Field(default=8, ge=0)
    max_vehicles: int = Field(default=3, ge=0)
    max_demands: int = Field(default=12, ge=0)

    @classmethod
    def from_settings(cls) -> "OracleLimits":
        settings = get_settings()
        return cls(
            max_customers=settings.oracle_max_customers,
            max_vehicles=settings.oracle_max_vehicles,
            max_demands=settings.oracle_max_demands,
        )

    def check(self, inst: Instance) -> None:
        """
        Raises:
            SizeCapExceededError: the instance is larger than a cap
        """
        sizes = (
            ("customers", len(inst.customers), self.max_customers),
            ("vehicles", len(inst.vehicles), self.max_vehicles),
            ("demands", len(inst.demand_refs), self.max_demands),
        )
        for what, size, cap in sizes:
            if size > cap:
                raise SizeCapExceededError(f"{inst.name}: {size} {what} exceed the oracle cap of {cap}")


class OracleResult(BaseModel):
    """Optimum found by enumeration"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    objective: Rational
    served: List[str]
    subsets_checked: int
    solution: Solution


# ===========================================
# Subset feasibility
# ===========================================

@dataclass(frozen=True)
class _Event:
    time: Fraction
    arrival: bool
    key: str


class _Search:
    """Depth-first search for one customer subset"""

    def __init__(self, inst: Instance, grid: TimeGrid, keys: List[str]):
        self.inst = inst
        self.grid = grid
        events = []
        for key in keys:
            d = inst.demand_map[key].demand
            events.append(_Event(d.depart, False, key))
            events.append(_Event(d.arrive, True, key))
        # arrivals before departures at one instant
        self.events = sorted(events, key=lambda e: (e.time, not e.arrival, e.key))
        self.failed: Set[Tuple] = set()

    def _energy(self, space: str, energy: Fraction, since: Optional[Fraction], t: Fraction) -> Fraction:
        if since is None or not self.grid.space_charger[space]:
            return energy
        return min(energy + self.inst.charge_rate * (t - since), self.inst.battery_capacity)

    def run(self) -> Optional[Placements]:
        parked = {}
        for space_id, vehicle_id in self.inst.initial_placement.items():
            vehicle = self.inst.vehicle_map[vehicle_id]
            station = self.inst.space_map[space_id].station
            parked[space_id] = (vehicle.initial_energy, self.grid.first_time(station))
        return self._dfs(0, parked, {}, {})

    def _dfs(self, i: int, parked: Dict, transit: Dict, placed: Placements) -> Optional[Placements]:
        if i == len(self.events):
            return dict(placed)
        state = (i, frozenset(parked.items()), frozenset(transit.items()))
        if state in self.failed:
            return None

        event = self.events[i]
        d = self.inst.demand_map[event.key].demand
        if event.arrival:
            tried_classes = set()
            for p in self.inst.spaces_by_station[d.dropoff_station]:
                if p.id in parked or p.has_charger in tried_classes:
                    continue
                tried_classes.add(p.has_charger)
                rest = dict(transit)
                energy = rest.pop(event.key)
                found = self._dfs(
                    i + 1,
                    {**parked, p.id: (energy, event.time)},
                    rest,
                    {**placed, event.key: (placed[event.key][0], p.id)},
                )
                if found is not None:
                    return found
        else:
            tried: Set[Tuple[Fraction, bool]] = set()
            for p in self.inst.spaces_by_station[d.pickup_station]:
                if p.id not in parked:
                    continue
                energy = self._energy(p.id, *parked[p.id], event.time)
                if energy < d.energy or (energy, p.has_charger) in tried:
                    continue
                tried.add((energy, p.has_charger))
                rest = {q: v for q, v in parked.items() if q != p.id}
                found = self._dfs(
                    i + 1,
                    rest,
                    {**transit, event.key: energy - d.energy},
                    {**placed, event.key: (p.id, "")},
                )
                if found is not None:
                    return found

        self.failed.add(state)
        return None


def subset_placements(inst: Instance, customers: Iterable[str], grid: Optional[TimeGrid] = None) -> Optional[Placements]:
    """Placements serving exactly the given customers, or None if impossible"""
    grid = grid or build_time_grid(inst)
    chosen = set(customers)
    keys = [ref.key for ref in inst.demand_refs if ref.customer_id in chosen]
    return _Search(inst, grid, keys).run()


def _subsets_by_value(inst: Instance, customers: List[str]) -> List[Tuple[str, ...]]:
    subsets = [
        combo
        for size in range(len(customers) + 1)
        for combo in itertools.combinations(sorted(customers), size)
    ]
    value = {c: inst.customer(c).total_rental_time for c in customers}
    return sorted(subsets, key=lambda s: (-sum(value[c] for c in s), s))


def solve_exhaustive(inst: Instance, limits: Optional[OracleLimits] = None) -> OracleResult:
    """
    Optimal objective and served set by enumeration.

    Args:
        inst: Instance within the caps
        limits: Size caps (settings defaults)

    Raises:
        SizeCapExceededError: the instance exceeds a cap
    """
    limits = limits or OracleLimits.from_settings()
    limits.check(inst)
    grid = build_time_grid(inst)

    checked = 0
    for subset in _subsets_by_value(inst, inst.customer_ids):
        checked += 1
        placements = subset_placements(inst, subset, grid)
        if placements is None:
            continue
        sol = compose_solution(inst, grid, placements)
        logger.debug(f"oracle {inst.name}: optimum {sol.objective} after {checked} subsets")
        return OracleResult(objective=sol.objective, served=list(subset), subsets_checked=checked, solution=sol)
    raise AssertionError("the empty subset is always feasible")


# ===========================================
# Non-monotone witnesses
# ===========================================

class NonmonotoneWitness(BaseModel):
    """
    An instance where serving more customers is possible while serving
    fewer is not.

    ``infeasible`` has k customers and cannot be served; ``feasible`` has
    k + 1 customers and can. In the strict form no k-subset at all can be
    served.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    instance: Instance
    k: int
    infeasible: List[str]
    feasible: List[str]
    strict: bool = False


def _witness_in(inst: Instance, grid: TimeGrid, strict: bool) -> Optional[NonmonotoneWitness]:
    customers = sorted(inst.customer_ids)
    feasible: Dict[FrozenSet[str], bool] = {}
    for size in range(len(customers) + 1):
        for combo in itertools.combinations(customers, size):
            feasible[frozenset(combo)] = subset_placements(inst, combo, grid) is not None

    for k in range(len(customers)):
        smaller = sorted((s for s in feasible if len(s) == k), key=sorted)
        larger = sorted((s for s in feasible if len(s) == k + 1 and feasible[s]), key=sorted)
        if not larger:
            continue
        if strict:
            if not any(feasible[s] for s in smaller):
                big = larger[0]
                small = next(s for s in smaller if s < big)
                return NonmonotoneWitness(instance=inst, k=k, infeasible=sorted(small), feasible=sorted(big), strict=True)
            continue
        for big in larger:
            for c in sorted(big):
                small = big - {c}
                if not feasible[small]:
                    return NonmonotoneWitness(instance=inst, k=k, infeasible=sorted(small), feasible=sorted(big))
    return None


def find_nonmonotone_witness(
    instances: Iterable[Instance],
    strict: bool = False,
    limits: Optional[OracleLimits] = None,
) -> Optional[NonmonotoneWitness]:
    """
    Search instances for a customer set that is servable while one of its
    subsets (strict: every set one smaller) is not.

    Instances exceeding the caps are skipped.

    Returns:
        The first witness found, or None
    """
    limits = limits or OracleLimits.from_settings()
    for inst in instances:
        try:
            limits.check(inst)
        except SizeCapExceededError:
            continue
        witness = _witness_in(inst, build_time_grid(inst), strict)
        if witness is not None:
            logger.info(f"oracle: non-monotone witness in {inst.name}: {witness.infeasible} infeasible, {witness.feasible} feasible")
            return witness
    return None
