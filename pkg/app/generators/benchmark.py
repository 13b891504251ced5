"""
Benchmark Instance Generators

Seeded generators shaped like the grid-based and VAMO benchmark families,
plus a tiny family sized for the exhaustive oracle. Every structural
choice uses integers drawn from one random.Random(seed), so the same
arguments give the same instance on any platform.

Travel model: straight-line distance at 30 km/h (500 m per minute) plus
0-10 minutes of jitter; trips that start and end at one station last
10-60 minutes. Consumption is 0.17 kWh per minute driven; batteries hold
30 kWh and chargers deliver 0.17 kWh per minute. Customers rent in a
morning or an evening chain, each demand picking up where the previous
one dropped off.
"""

import math
import random
from typing import Callable, List, Optional, Tuple

from app.config import get_settings
from app.errors import InvalidScenarioError
from app.schemas.models import WATT_MINUTES_PER_KWH, Customer, Demand, Instance, Station, Vehicle
from app.utils.logger import logger

BATTERY_CAPACITY = 30 * WATT_MINUTES_PER_KWH
CONSUMPTION_PER_MINUTE = 17 * WATT_MINUTES_PER_KWH // 100
CHARGE_RATE = 17 * WATT_MINUTES_PER_KWH // 100
GRID_SIDE_METRES = 50_000
METRES_PER_MINUTE = 500

MORNING_START = (420, 540)
EVENING_START = (1020, 1140)

# station coordinates in metres, two small stations first
VAMO_SITES: List[Tuple[int, int]] = [
    (1200, 5400), (6800, 1500),
    (2500, 2600), (3900, 3100), (4700, 4400), (5600, 2900),
    (3100, 5200), (4200, 6100), (5900, 5600), (7200, 4000),
    (2000, 4100), (6400, 7000),
]
VAMO_CAPACITIES = [3, 3] + [4] * 10


def _ceil_percent(value: int, percent: int) -> int:
    return -(-value * percent // 100)


def _travel_minutes(rng: random.Random, a: Tuple[int, int], b: Tuple[int, int], same: bool) -> int:
    if same:
        return rng.randint(10, 60)
    distance = math.isqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)
    return max(1, -(-distance // METRES_PER_MINUTE) + rng.randint(0, 10))


def _customers(
    rng: random.Random,
    n_customers: int,
    sites: List[Tuple[int, int]],
    demand_count: Callable[[], int],
) -> List[Customer]:
    ids = [f"s{i + 1}" for i in range(len(sites))]
    customers = []
    for c in range(n_customers):
        window = MORNING_START if rng.randint(0, 1) == 0 else EVENING_START
        clock = rng.randint(*window)
        here = rng.randrange(len(sites))
        demands = []
        for _ in range(demand_count()):
            there = rng.randrange(len(sites))
            minutes = _travel_minutes(rng, sites[here], sites[there], here == there)
            demands.append(Demand(
                pickup_station=ids[here],
                depart=clock,
                dropoff_station=ids[there],
                arrive=clock + minutes,
                energy=minutes * CONSUMPTION_PER_MINUTE,
            ))
            clock += minutes + rng.randint(30, 240)
            here = there
        customers.append(Customer(id=f"c{c + 1}", demands=demands))
    return customers


def _fleet(
    capacities: List[int],
    chargers: List[int],
    vehicles: List[int],
    energy: Callable[[], int] = lambda: BATTERY_CAPACITY,
) -> Tuple[List[Station], List[Vehicle]]:
    stations, fleet = [], []
    for i, (cap, charging, count) in enumerate(zip(capacities, chargers, vehicles)):
        sid = f"s{i + 1}"
        stations.append(Station(id=sid, capacity=cap, chargers=charging))
        on_charger = min(count, charging)
        for k in range(count):
            fleet.append(Vehicle(
                id=f"v{len(fleet) + 1}",
                initial_station=sid,
                initial_energy=energy(),
                initially_on_charger=k < on_charger,
            ))
    return stations, fleet


def generate_grid(
    n_customers: int,
    seed: int,
    vehicle_percent: Optional[int] = None,
    charger_percent: Optional[int] = None,
) -> Instance:
    """
    Grid-based instance: 3-5 stations placed in a 50 km square, capacities
    10-20, customers with 1-4 demands.

    Args:
        n_customers: Number of customers (>= 1)
        seed: Random seed
        vehicle_percent: Vehicles per station as % of capacity, rounded up (settings default)
        charger_percent: Charging spaces per station as % of capacity, rounded up (settings default)
    """
    if n_customers < 1:
        raise ValueError("n_customers must be at least 1")
    settings = get_settings()
    vehicle_percent = settings.grid_vehicle_percent if vehicle_percent is None else vehicle_percent
    charger_percent = settings.grid_charger_percent if charger_percent is None else charger_percent

    rng = random.Random(seed)
    n_stations = rng.randint(3, 5)
    sites = [(rng.randint(0, GRID_SIDE_METRES), rng.randint(0, GRID_SIDE_METRES)) for _ in range(n_stations)]
    capacities = [rng.randint(10, 20) for _ in range(n_stations)]
    chargers = [_ceil_percent(c, charger_percent) for c in capacities]
    vehicles = [_ceil_percent(c, vehicle_percent) for c in capacities]
    stations, fleet = _fleet(capacities, chargers, vehicles)
    customers = _customers(rng, n_customers, sites, lambda: rng.randint(1, 4))

    logger.debug(f"generated grid instance: {n_stations} stations, {len(fleet)} vehicles, {n_customers} customers")
    return Instance(
        name=f"grid-{n_customers}-s{seed}",
        battery_capacity=BATTERY_CAPACITY,
        charge_rate=CHARGE_RATE,
        stations=stations,
        vehicles=fleet,
        customers=customers,
    )


def generate_vamo(scenario: int, n_customers: int, seed: int) -> Instance:
    """
    VAMO-shaped instance on a fixed 12-station topology.

    Scenarios:
        1: capacities {3, 3, 4 x 10}, every space with a charger, vehicles
           at half capacity (rounded up), one demand per customer
        2: as 1 with 1-4 demands per customer
        3: as 2 with capacities, chargers and vehicles drawn like grid instances
        4: as 3 with every capacity raised to the fleet size

    Raises:
        InvalidScenarioError: scenario not in 1..4
    """
    if scenario not in (1, 2, 3, 4):
        raise InvalidScenarioError(f"unknown VAMO scenario {scenario}")
    settings = get_settings()
    rng = random.Random(seed)

    if scenario in (1, 2):
        capacities = list(VAMO_CAPACITIES)
        chargers = list(capacities)
        vehicles = [_ceil_percent(c, 50) for c in capacities]
    else:
        capacities = [rng.randint(10, 20) for _ in VAMO_SITES]
        chargers = [_ceil_percent(c, settings.grid_charger_percent) for c in capacities]
        vehicles = [_ceil_percent(c, settings.grid_vehicle_percent) for c in capacities]
        if scenario == 4:
            capacities = [sum(vehicles)] * len(VAMO_SITES)
            chargers = [min(r, c) for r, c in zip(chargers, capacities)]

    stations, fleet = _fleet(capacities, chargers, vehicles)
    count = (lambda: 1) if scenario == 1 else (lambda: rng.randint(1, 4))
    customers = _customers(rng, n_customers, VAMO_SITES, count)

    return Instance(
        name=f"vamo{scenario}-{n_customers}-s{seed}",
        battery_capacity=BATTERY_CAPACITY,
        charge_rate=CHARGE_RATE,
        stations=stations,
        vehicles=fleet,
        customers=customers,
    )


def generate_tiny(n_customers: int, seed: int) -> Instance:
    """
    Instance small enough for the exhaustive oracle: 1-2 stations of 1-2
    spaces, at most 3 vehicles, 1-2 demands per customer in a one-hour
    window, a 100 kWh battery and 10-80 kWh per demand so energy often binds.
    """
    rng = random.Random(seed)
    n_stations = rng.randint(1, 2)
    capacities = [rng.randint(1, 2) for _ in range(n_stations)]
    chargers = [rng.randint(0, c) for c in capacities]
    vehicles = [rng.randint(0, c) for c in capacities]
    if sum(vehicles) == 0:
        vehicles[0] = 1
    while sum(vehicles) > 3:
        vehicles[-1] -= 1
    unit = WATT_MINUTES_PER_KWH
    battery = 100 * unit

    stations, fleet = _fleet(capacities, chargers, vehicles, energy=lambda: rng.randint(25, 100) * unit)

    customers = []
    for c in range(n_customers):
        clock = rng.randint(0, 40)
        here = rng.randrange(n_stations)
        demands = []
        for _ in range(rng.randint(1, 2)):
            there = rng.randrange(n_stations)
            minutes = rng.randint(1, 15)
            demands.append(Demand(
                pickup_station=f"s{here + 1}",
                depart=clock,
                dropoff_station=f"s{there + 1}",
                arrive=clock + minutes,
                energy=rng.randint(10, 80) * unit,
            ))
            clock += minutes + rng.randint(0, 10)
            here = there
        customers.append(Customer(id=f"c{c + 1}", demands=demands))

    return Instance(
        name=f"tiny-{n_customers}-s{seed}",
        battery_capacity=battery,
        charge_rate=rng.randint(1, 5) * unit,
        stations=stations,
        vehicles=fleet,
        customers=customers,
    )
