"""
Time Grid

Per-station event times, the per-space grids T^p and T^p_0, and charge
increments E^p_t. Charging only accrues between consecutive grid times of
a station; the increment at the first grid time (whose predecessor is the
initial instant) is zero.
"""

from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Tuple

from app.schemas.models import FrozenModel, Instance
from app.schemas.solution import T0, GridTime


class TimeGrid(FrozenModel):
    """Time instants of every station and parking space"""
    station_times: Dict[str, Tuple[Fraction, ...]]
    space_station: Dict[str, str]
    space_charger: Dict[str, bool]
    charge_rate: Fraction

    @cached_property
    def all_times(self) -> List[Fraction]:
        return sorted({t for times in self.station_times.values() for t in times})

    def times(self, space: str) -> Tuple[Fraction, ...]:
        """T^p"""
        return self.station_times[self.space_station[space]]

    def times0(self, space: str) -> Tuple[GridTime, ...]:
        """T^p_0, the grid prefixed with the initial instant"""
        return (T0,) + self.times(space)

    @cached_property
    def prev_index(self) -> Dict[str, Dict[Fraction, GridTime]]:
        result = {}
        for sid, times in self.station_times.items():
            result[sid] = dict(zip(times, (T0,) + times[:-1]))
        return result

    def prev(self, space: str, t: Fraction) -> GridTime:
        """max{t' in T^p_0 : t' < t} for a grid time t of the space"""
        return self.prev_index[self.space_station[space]][t]

    def first_time(self, station: str):
        times = self.station_times[station]
        return times[0] if times else None

    def increment(self, space: str, t: Fraction) -> Fraction:
        """E^p_t in watt-minutes"""
        if not self.space_charger[space]:
            return Fraction(0)
        before = self.prev(space, t)
        if before == T0:
            return Fraction(0)
        return self.charge_rate * (t - before)


def event_points(inst: Instance) -> Dict[str, set]:
    """The set Pi grouped by station: every (s_out, t_i) and (s_in, t_j)"""
    points: Dict[str, set] = {sid: set() for sid in inst.station_ids}
    for ref in inst.demand_refs:
        d = ref.demand
        points[d.pickup_station].add(d.depart)
        points[d.dropoff_station].add(d.arrive)
    return points


def build_time_grid(inst: Instance) -> TimeGrid:
    """
    Derive the time grid of an instance.

    Args:
        inst: Validated instance

    Returns:
        TimeGrid with sorted station times and space metadata
    """
    return TimeGrid(
        station_times={sid: tuple(sorted(ts)) for sid, ts in event_points(inst).items()},
        space_station={p.id: p.station for p in inst.parking_spaces},
        space_charger={p.id: p.has_charger for p in inst.parking_spaces},
        charge_rate=inst.charge_rate,
    )
