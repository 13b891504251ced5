"""
Domain Models Module

Pydantic models for the EVSP instance: stations, parking spaces, vehicles,
customers and their demands. Internally energies are watt-minutes and
times are minutes, both held as exact fractions.
"""

from fractions import Fraction
from functools import cached_property
from typing import Annotated, Any, Dict, List, Tuple, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator

from app.errors import InstanceValidationError, UnknownCustomerError

WATT_MINUTES_PER_KWH = 60000


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rational numbers")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # the shortest repr is what the file said, e.g. 6.34 and not its binary expansion
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise ValueError(f"not a rational number: {value!r}")


def _fraction_out(value: Fraction) -> Union[int, float, str]:
    """Integer, decimal when the shortest float repr is exact, else "p/q" """
    if value.denominator == 1:
        return int(value)
    as_float = float(value)
    if Fraction(repr(as_float)) == value:
        return as_float
    return f"{value.numerator}/{value.denominator}"


Rational = Annotated[Fraction, BeforeValidator(_to_fraction), PlainSerializer(_fraction_out)]


class FrozenModel(BaseModel):
    """Immutable base for shared domain objects"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ===========================================
# Instance building blocks
# ===========================================

class Station(FrozenModel):
    """A station with C_s parking spaces, R_s of them with a charger"""
    id: str
    capacity: int = Field(ge=1, description="Number of parking spaces (C_s)")
    chargers: int = Field(ge=0, description="Number of charging spaces (R_s)")


class ParkingSpace(FrozenModel):
    """One parking space; derived from its station, never read from file"""
    id: str
    station: str
    has_charger: bool
    index: int = Field(ge=1, description="1-based position within the station")


class Vehicle(FrozenModel):
    """A vehicle and its initial state"""
    id: str
    initial_station: str
    initial_energy: Rational = Field(description="L^v in watt-minutes")
    initially_on_charger: bool = False


class Demand(FrozenModel):
    """A driving demand (s_out, t_i, s_in, t_j, energy)"""
    pickup_station: str
    depart: Rational
    dropoff_station: str
    arrive: Rational
    energy: Rational = Field(description="Energy consumed in watt-minutes")

    @property
    def duration(self) -> Fraction:
        return self.arrive - self.depart

    @property
    def inter_station(self) -> bool:
        return self.pickup_station != self.dropoff_station


class Customer(FrozenModel):
    """A customer served only if all of their demands are fulfilled"""
    id: str
    demands: List[Demand] = Field(min_length=1)

    @property
    def total_rental_time(self) -> Fraction:
        return sum((d.duration for d in self.demands), Fraction(0))


class DemandRef(FrozenModel):
    """A demand together with its owning customer and a stable key"""
    key: str
    customer_id: str
    index: int
    demand: Demand


def demand_key(customer_id: str, index: int) -> str:
    return f"{customer_id}#{index}"


# ===========================================
# Instance
# ===========================================

class Instance(FrozenModel):
    """
    A complete EVSP instance.

    Construction checks every domain invariant and raises
    InstanceValidationError naming the first one violated.
    """
    name: str
    battery_capacity: Rational = Field(description="L in watt-minutes")
    charge_rate: Rational = Field(description="mu in watt-minutes per minute")
    stations: List[Station]
    vehicles: List[Vehicle]
    customers: List[Customer]

    @model_validator(mode="after")
    def _check_invariants(self) -> "Instance":
        check_instance(self)
        return self

    # -- lookups -------------------------------------------------------

    @cached_property
    def station_ids(self) -> List[str]:
        return sorted(s.id for s in self.stations)

    @cached_property
    def station_map(self) -> Dict[str, Station]:
        return {s.id: s for s in self.stations}

    @cached_property
    def customer_map(self) -> Dict[str, Customer]:
        return {c.id: c for c in self.customers}

    @cached_property
    def customer_ids(self) -> List[str]:
        return sorted(self.customer_map)

    @cached_property
    def parking_spaces(self) -> List[ParkingSpace]:
        """All spaces ordered by station id then index; chargers come first at each station"""
        spaces = []
        for sid in self.station_ids:
            station = self.station_map[sid]
            for k in range(1, station.capacity + 1):
                spaces.append(ParkingSpace(
                    id=f"{sid}.p{k}",
                    station=sid,
                    has_charger=k <= station.chargers,
                    index=k,
                ))
        return spaces

    @cached_property
    def space_map(self) -> Dict[str, ParkingSpace]:
        return {p.id: p for p in self.parking_spaces}

    @cached_property
    def spaces_by_station(self) -> Dict[str, List[ParkingSpace]]:
        grouped: Dict[str, List[ParkingSpace]] = {sid: [] for sid in self.station_ids}
        for p in self.parking_spaces:
            grouped[p.station].append(p)
        return grouped

    @cached_property
    def demand_refs(self) -> List[DemandRef]:
        """Every demand keyed as ``<customer>#<index>``, in customer id order"""
        refs = []
        for cid in self.customer_ids:
            for i, d in enumerate(self.customer_map[cid].demands):
                refs.append(DemandRef(key=demand_key(cid, i), customer_id=cid, index=i, demand=d))
        return refs

    @cached_property
    def demand_map(self) -> Dict[str, DemandRef]:
        return {r.key: r for r in self.demand_refs}

    def customer(self, customer_id: str) -> Customer:
        try:
            return self.customer_map[customer_id]
        except KeyError:
            raise UnknownCustomerError(customer_id) from None

    @cached_property
    def initial_placement(self) -> Dict[str, str]:
        """
        The placement psi: parking space id -> vehicle id.

        Vehicles are taken in id order; charger-initial vehicles fill the
        charger spaces of their station in index order, the others fill the
        plain spaces.
        """
        placement: Dict[str, str] = {}
        for sid in self.station_ids:
            spaces = self.spaces_by_station[sid]
            chargers = [p for p in spaces if p.has_charger]
            plain = [p for p in spaces if not p.has_charger]
            here = sorted((v for v in self.vehicles if v.initial_station == sid), key=lambda v: v.id)
            on = [v for v in here if v.initially_on_charger]
            off = [v for v in here if not v.initially_on_charger]
            if len(on) > len(chargers) or len(off) > len(plain):
                raise InstanceValidationError(
                    "initial-placement",
                    f"station {sid} cannot place {len(on)} charging and {len(off)} non-charging vehicles",
                )
            for p, v in zip(chargers, on):
                placement[p.id] = v.id
            for p, v in zip(plain, off):
                placement[p.id] = v.id
        return placement

    @cached_property
    def vehicle_map(self) -> Dict[str, Vehicle]:
        return {v.id: v for v in self.vehicles}


def _duplicates(ids: List[str]) -> List[str]:
    seen, dup = set(), []
    for i in ids:
        if i in seen:
            dup.append(i)
        seen.add(i)
    return dup


def check_instance(inst: Instance) -> None:
    """
    Check every instance invariant.

    Raises:
        InstanceValidationError: naming the first violated invariant
    """
    if inst.charge_rate <= 0:
        raise InstanceValidationError("charge-rate-positive", f"charge rate {inst.charge_rate} must be > 0")
    if inst.battery_capacity <= 0:
        raise InstanceValidationError("battery-positive", f"battery capacity {inst.battery_capacity} must be > 0")

    for kind, ids in (
        ("station", [s.id for s in inst.stations]),
        ("vehicle", [v.id for v in inst.vehicles]),
        ("customer", [c.id for c in inst.customers]),
    ):
        dup = _duplicates(ids)
        if dup:
            raise InstanceValidationError(f"unique-{kind}-ids", f"duplicate {kind} id {dup[0]!r}")

    stations = {s.id: s for s in inst.stations}
    for s in inst.stations:
        if s.chargers > s.capacity:
            raise InstanceValidationError("chargers-within-capacity", f"station {s.id}: {s.chargers} chargers > capacity {s.capacity}")

    per_station: Dict[str, List[Vehicle]] = {sid: [] for sid in stations}
    for v in inst.vehicles:
        if v.initial_station not in stations:
            raise InstanceValidationError("known-station", f"vehicle {v.id} starts at unknown station {v.initial_station!r}")
        if not 0 <= v.initial_energy <= inst.battery_capacity:
            raise InstanceValidationError("initial-energy-range", f"vehicle {v.id}: initial energy outside [0, L]")
        per_station[v.initial_station].append(v)

    for sid, here in per_station.items():
        station = stations[sid]
        if len(here) > station.capacity:
            raise InstanceValidationError("vehicles-within-capacity", f"station {sid}: {len(here)} vehicles > capacity {station.capacity}")
        on = sum(1 for v in here if v.initially_on_charger)
        if on > station.chargers:
            raise InstanceValidationError("charging-vehicles-within-chargers", f"station {sid}: {on} vehicles on chargers > {station.chargers} chargers")
        if len(here) - on > station.capacity - station.chargers:
            raise InstanceValidationError("plain-vehicles-within-plain-spaces", f"station {sid}: {len(here) - on} vehicles off chargers > {station.capacity - station.chargers} plain spaces")

    for c in inst.customers:
        for i, d in enumerate(c.demands):
            where = f"customer {c.id} demand {i}"
            if d.pickup_station not in stations or d.dropoff_station not in stations:
                raise InstanceValidationError("known-station", f"{where} references an unknown station")
            if not d.depart < d.arrive:
                raise InstanceValidationError("depart-before-arrive", f"{where}: depart {d.depart} is not before arrive {d.arrive}")
            if d.energy <= 0:
                raise InstanceValidationError("energy-positive", f"{where}: energy must be > 0")
            if d.energy > inst.battery_capacity:
                raise InstanceValidationError("energy-within-battery", f"{where}: energy {d.energy} exceeds battery capacity {inst.battery_capacity}")
        periods: List[Tuple[Fraction, Fraction]] = sorted((d.depart, d.arrive) for d in c.demands)
        for (a0, b0), (a1, b1) in zip(periods, periods[1:]):
            # right-open periods: [a0, b0) and [a1, b1) may touch at b0 == a1
            if a1 < b0:
                raise InstanceValidationError("no-overlapping-rentals", f"customer {c.id}: rental periods overlap at {a1}")
