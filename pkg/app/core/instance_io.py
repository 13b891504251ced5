"""
Instance and Solution Files

Reads and writes the versioned JSON formats. Files carry kWh and
minutes; the domain model carries watt-minutes and exact fractions.
Output is canonical (orjson, two-space indent, trailing newline), so
save(load(f)) reproduces a canonically formatted file byte for byte.
Rationals without an exact decimal form (1/60000 kWh, a third of a
minute) are written as "p/q" strings, which the readers accept as well.
"""

from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Union

import orjson
from pydantic import ValidationError

from app.errors import InstanceFormatError, InstanceValidationError
from app.schemas.models import (
    WATT_MINUTES_PER_KWH,
    Customer,
    Demand,
    Instance,
    Station,
    Vehicle,
    _fraction_out,
    _to_fraction,
)
from app.schemas.solution import Fulfillment, SchedulePoint, Solution
from app.utils.logger import logger

FORMAT_VERSION = 1

PathLike = Union[str, Path]


def _kwh_to_wmin(value: Any) -> Fraction:
    return _to_fraction(value) * WATT_MINUTES_PER_KWH


def _wmin_to_kwh(value: Fraction) -> Union[int, float, str]:
    return _fraction_out(Fraction(value) / WATT_MINUTES_PER_KWH)


def _float_wmin_to_kwh(value: float) -> float:
    return value / WATT_MINUTES_PER_KWH


def _read_json(path: PathLike) -> Dict[str, Any]:
    try:
        raw = orjson.loads(Path(path).read_bytes())
    except OSError as e:
        raise InstanceFormatError(f"{path}: cannot read: {e}") from e
    except orjson.JSONDecodeError as e:
        raise InstanceFormatError(f"{path}: malformed JSON: {e}") from e
    if not isinstance(raw, dict):
        raise InstanceFormatError(f"{path}: top level must be an object")
    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"{path}: unsupported format_version {version!r}")
    return raw


def _dump(payload: Dict[str, Any]) -> bytes:
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2) + b"\n"


# ===========================================
# Instances
# ===========================================

def instance_from_dict(raw: Dict[str, Any]) -> Instance:
    """
    Build an Instance from a parsed instance document.

    Raises:
        InstanceFormatError: missing fields or non-numeric values
        InstanceValidationError: a domain invariant is violated
    """
    try:
        stations = [
            Station(id=str(s["id"]), capacity=s["capacity"], chargers=s["chargers"])
            for s in raw["stations"]
        ]
        vehicles = [
            Vehicle(
                id=str(v["id"]),
                initial_station=str(v["station"]),
                initial_energy=_kwh_to_wmin(v["initial_energy_kwh"]),
                initially_on_charger=bool(v["on_charger"]),
            )
            for v in raw["vehicles"]
        ]
        customers = [
            Customer(
                id=str(c["id"]),
                demands=[
                    Demand(
                        pickup_station=str(d["from"]),
                        depart=_to_fraction(d["depart_min"]),
                        dropoff_station=str(d["to"]),
                        arrive=_to_fraction(d["arrive_min"]),
                        energy=_kwh_to_wmin(d["energy_kwh"]),
                    )
                    for d in c["demands"]
                ],
            )
            for c in raw["customers"]
        ]
        battery = _kwh_to_wmin(raw["battery_capacity_kwh"])
        rate = _kwh_to_wmin(raw["charge_rate_kwh_per_min"])
        name = str(raw["name"])
    except KeyError as e:
        raise InstanceFormatError(f"missing field {e}") from e
    except (TypeError, ValueError, ZeroDivisionError) as e:
        if isinstance(e, ValidationError):
            raise _as_invariant_error(e) from e
        raise InstanceFormatError(str(e)) from e

    try:
        return Instance(
            name=name,
            battery_capacity=battery,
            charge_rate=rate,
            stations=stations,
            vehicles=vehicles,
            customers=customers,
        )
    except ValidationError as e:
        raise _as_invariant_error(e) from e


def _as_invariant_error(e: ValidationError) -> InstanceValidationError:
    first = e.errors()[0]
    where = ".".join(str(part) for part in first.get("loc", ()))
    return InstanceValidationError(f"field:{where or 'instance'}", first.get("msg", str(e)))


def instance_to_dict(inst: Instance) -> Dict[str, Any]:
    """Canonical instance document"""
    return {
        "format_version": FORMAT_VERSION,
        "name": inst.name,
        "battery_capacity_kwh": _wmin_to_kwh(inst.battery_capacity),
        "charge_rate_kwh_per_min": _wmin_to_kwh(inst.charge_rate),
        "stations": [
            {"id": s.id, "capacity": s.capacity, "chargers": s.chargers}
            for s in inst.stations
        ],
        "vehicles": [
            {
                "id": v.id,
                "station": v.initial_station,
                "initial_energy_kwh": _wmin_to_kwh(v.initial_energy),
                "on_charger": v.initially_on_charger,
            }
            for v in inst.vehicles
        ],
        "customers": [
            {
                "id": c.id,
                "demands": [
                    {
                        "from": d.pickup_station,
                        "depart_min": _fraction_out(d.depart),
                        "to": d.dropoff_station,
                        "arrive_min": _fraction_out(d.arrive),
                        "energy_kwh": _wmin_to_kwh(d.energy),
                    }
                    for d in c.demands
                ],
            }
            for c in inst.customers
        ],
    }


def dumps_instance(inst: Instance) -> bytes:
    return _dump(instance_to_dict(inst))


def load_instance(path: PathLike) -> Instance:
    """
    Load and validate an instance file.

    Args:
        path: Instance JSON file

    Returns:
        Validated Instance
    """
    inst = instance_from_dict(_read_json(path))
    logger.debug(f"Loaded instance {inst.name}: {len(inst.stations)} stations, {len(inst.customers)} customers, {len(inst.demand_refs)} demands")
    return inst


def save_instance(inst: Instance, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_instance(inst))


# ===========================================
# Solutions
# ===========================================

def solution_to_dict(sol: Solution) -> Dict[str, Any]:
    """Canonical solution document"""
    return {
        "format_version": FORMAT_VERSION,
        "instance": sol.instance,
        "objective_min": _fraction_out(sol.objective),
        "served": list(sol.served),
        "fulfillments": [
            {
                "demand": f.demand,
                "pickup_space": f.pickup_space,
                "dropoff_space": f.dropoff_space,
                "outgoing_energy_kwh": _float_wmin_to_kwh(f.outgoing_energy),
                "incoming_energy_kwh": _float_wmin_to_kwh(f.incoming_energy),
            }
            for f in sol.fulfillments
        ],
        "schedule": {
            space: [
                {
                    "t": None if pt.time is None else _fraction_out(pt.time),
                    "occupied": pt.occupied,
                    "energy_kwh": _float_wmin_to_kwh(pt.energy),
                }
                for pt in points
            ]
            for space, points in sol.schedule.items()
        },
    }


def solution_from_dict(raw: Dict[str, Any]) -> Solution:
    try:
        fulfillments: List[Fulfillment] = [
            Fulfillment(
                demand=f["demand"],
                pickup_space=f["pickup_space"],
                dropoff_space=f["dropoff_space"],
                outgoing_energy=float(f["outgoing_energy_kwh"]) * WATT_MINUTES_PER_KWH,
                incoming_energy=float(f["incoming_energy_kwh"]) * WATT_MINUTES_PER_KWH,
            )
            for f in raw["fulfillments"]
        ]
        schedule = {
            space: [
                SchedulePoint(
                    time=None if pt["t"] is None else _to_fraction(pt["t"]),
                    occupied=bool(pt["occupied"]),
                    energy=float(pt["energy_kwh"]) * WATT_MINUTES_PER_KWH,
                )
                for pt in points
            ]
            for space, points in raw["schedule"].items()
        }
        return Solution(
            instance=str(raw["instance"]),
            served=[str(c) for c in raw["served"]],
            fulfillments=fulfillments,
            schedule=schedule,
            objective=_to_fraction(raw["objective_min"]),
        )
    except KeyError as e:
        raise InstanceFormatError(f"missing field {e}") from e
    except (TypeError, ValueError) as e:
        raise InstanceFormatError(str(e)) from e


def load_solution(path: PathLike) -> Solution:
    return solution_from_dict(_read_json(path))


def save_solution(sol: Solution, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_dump(solution_to_dict(sol)))
