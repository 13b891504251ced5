"""
Shared Test Fixtures

Hand-built instances with known optima plus seeded tiny suites.
"""

from pathlib import Path

import pytest

from app.core.instance_io import load_instance
from app.core.time_grid import build_time_grid
from app.generators import generate_tiny
from app.schemas.models import WATT_MINUTES_PER_KWH, Customer, Demand, Instance, Station, Vehicle
from app.schemas.solution import Solution

DATA_DIR = Path(__file__).parent.parent / "data"
THREE_STATION_PATH = DATA_DIR / "three_station.json"

KWH = WATT_MINUTES_PER_KWH

SWAP_PLACEMENTS = {"c1#0": ("s2.p1", "s1.p1"), "c2#0": ("s1.p1", "s2.p1")}


def demand(src: str, depart, dst: str, arrive, kwh) -> Demand:
    return Demand(pickup_station=src, depart=depart, dropoff_station=dst, arrive=arrive, energy=kwh * KWH)


def tampered(sol: Solution, **update) -> Solution:
    """A fresh Solution with some fields replaced"""
    data = {name: getattr(sol, name) for name in Solution.model_fields}
    data.update(update)
    return Solution(**data)


def assert_flows_conserved(inst: Instance, sol: Solution) -> None:
    """Every rental consumes exactly its energy and occupancy moves only with rentals"""
    tol = 1e-6 * float(inst.battery_capacity)
    moves = {}
    for f in sol.fulfillments:
        d = inst.demand_map[f.demand].demand
        assert f.outgoing_energy - f.incoming_energy == pytest.approx(float(d.energy), abs=tol), f.demand
        moves[(f.pickup_space, d.depart)] = moves.get((f.pickup_space, d.depart), 0) - 1
        moves[(f.dropoff_space, d.arrive)] = moves.get((f.dropoff_space, d.arrive), 0) + 1
    grid = build_time_grid(inst)
    for p in inst.parking_spaces:
        for t in grid.times(p.id):
            change = int(sol.occupancy[(p.id, t)]) - int(sol.occupancy[(p.id, grid.prev(p.id, t))])
            assert change == moves.get((p.id, t), 0), f"{inst.name} {p.id}"


# ===========================================
# Fixtures
# ===========================================

@pytest.fixture
def three_station_path():
    return THREE_STATION_PATH


@pytest.fixture
def three_station():
    """Three stations, three vehicles, seven customers; optimum 274"""
    return load_instance(THREE_STATION_PATH)


@pytest.fixture
def conflict():
    """One vehicle, two overlapping customers; optimum 15 serving c2"""
    return Instance(
        name="conflict",
        battery_capacity=10 * KWH,
        charge_rate=KWH,
        stations=[Station(id="s1", capacity=1, chargers=0)],
        vehicles=[Vehicle(id="v1", initial_station="s1", initial_energy=10 * KWH)],
        customers=[
            Customer(id="c1", demands=[demand("s1", 0, "s1", 10, 2)]),
            Customer(id="c2", demands=[demand("s1", 5, "s1", 20, 2)]),
        ],
    )


@pytest.fixture
def charging():
    """
    One charging space. Serving c1 leaves too little energy for c2 two
    minutes later; c2 alone is served after a full recharge. Optimum 18.
    """
    return Instance(
        name="charging",
        battery_capacity=10 * KWH,
        charge_rate=KWH,
        stations=[Station(id="s1", capacity=1, chargers=1)],
        vehicles=[Vehicle(id="v1", initial_station="s1", initial_energy=5 * KWH, initially_on_charger=True)],
        customers=[
            Customer(id="c1", demands=[demand("s1", 10, "s1", 20, 2)]),
            Customer(id="c2", demands=[demand("s1", 22, "s1", 40, 8)]),
        ],
    )


@pytest.fixture
def swap():
    """
    Two full single-space stations. c1 and c2 only fit together because each
    frees the space the other returns to. Optimum 35, no single customer feasible.
    """
    return Instance(
        name="swap",
        battery_capacity=10 * KWH,
        charge_rate=KWH,
        stations=[Station(id="s1", capacity=1, chargers=0), Station(id="s2", capacity=1, chargers=0)],
        vehicles=[
            Vehicle(id="v1", initial_station="s1", initial_energy=10 * KWH),
            Vehicle(id="v2", initial_station="s2", initial_energy=10 * KWH),
        ],
        customers=[
            Customer(id="c1", demands=[demand("s2", 10, "s1", 20, 1)]),
            Customer(id="c2", demands=[demand("s1", 5, "s2", 30, 1)]),
        ],
    )


@pytest.fixture
def spread():
    """Two plain vehicles at s1 and an empty s2 with one charger and two plain spaces"""
    return Instance(
        name="spread",
        battery_capacity=10 * KWH,
        charge_rate=KWH,
        stations=[Station(id="s1", capacity=2, chargers=0), Station(id="s2", capacity=3, chargers=1)],
        vehicles=[
            Vehicle(id="v1", initial_station="s1", initial_energy=10 * KWH),
            Vehicle(id="v2", initial_station="s1", initial_energy=10 * KWH),
        ],
        customers=[
            Customer(id="c1", demands=[demand("s1", 0, "s2", 10, 1)]),
            Customer(id="c2", demands=[demand("s1", 5, "s2", 12, 1)]),
        ],
    )


@pytest.fixture
def tiny_suite():
    """Seeded instances within the oracle caps"""
    return [generate_tiny(4, seed) for seed in range(20)]


@pytest.fixture
def relay():
    """
    One vehicle handed from c1 to c2 on the single space of s2 at minute 10:
    c1 returns it there the same minute c2 picks it up. Optimum 20.
    """
    return Instance(
        name="relay",
        battery_capacity=10 * KWH,
        charge_rate=KWH,
        stations=[Station(id="s1", capacity=1, chargers=0), Station(id="s2", capacity=1, chargers=0)],
        vehicles=[Vehicle(id="v1", initial_station="s1", initial_energy=10 * KWH)],
        customers=[
            Customer(id="c1", demands=[demand("s1", 0, "s2", 10, 1)]),
            Customer(id="c2", demands=[demand("s2", 10, "s1", 20, 1)]),
        ],
    )


@pytest.fixture
def oracle_suite():
    """Fifty seeded instances of 4 to 6 customers within the oracle caps"""
    return [generate_tiny(4 + seed % 3, seed) for seed in range(50)]
