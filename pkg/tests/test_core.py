"""
Core Tests Module

Instance invariants, file I/O, the time grid, objective evaluation and
fleet replay.
"""

from fractions import Fraction

import pytest

from app.core.instance_io import (
    dumps_instance,
    load_instance,
    load_solution,
    save_instance,
    save_solution,
)
from app.core.objective import evaluate_objective
from app.core.replay import compose_solution, extract_assignment_plans, replay
from app.core.time_grid import build_time_grid
from app.errors import InstanceFormatError, InstanceValidationError, TraceInconsistencyError, UnknownCustomerError
from app.schemas.models import Customer, Instance, Station, Vehicle, _fraction_out
from app.schemas.reports import ValidationCheck
from app.schemas.solution import T0, PlanEventKind

from tests.conftest import KWH, demand


class TestInstanceInvariants:
    """Tests for instance construction checks"""

    def test_three_station_shape(self, three_station):
        """The three-station instance loads with its stations, fleet and demands"""
        assert three_station.station_ids == ["s1", "s2", "s3"]
        assert len(three_station.vehicles) == 3
        assert len(three_station.customers) == 7
        assert len(three_station.demand_refs) == 9

    def test_decimal_energy_is_exact(self, three_station):
        """6.34 kWh becomes exactly 380400 W·min"""
        assert three_station.demand_map["c1#0"].demand.energy == Fraction(380400)
        assert three_station.charge_rate == Fraction(10200)

    def test_parking_spaces_chargers_first(self, three_station):
        """Spaces are numbered per station with the charger spaces first"""
        spaces = three_station.spaces_by_station["s1"]
        assert [p.id for p in spaces] == ["s1.p1", "s1.p2"]
        assert spaces[0].has_charger and not spaces[1].has_charger

    def test_initial_placement_on_chargers(self, three_station):
        """Charging vehicles are placed on charger spaces"""
        assert three_station.initial_placement == {"s1.p1": "v1", "s2.p1": "v2", "s3.p1": "v3"}

    def test_chargers_exceed_capacity(self):
        """More chargers than spaces is rejected"""
        with pytest.raises(InstanceValidationError) as exc:
            Instance(
                name="bad",
                battery_capacity=KWH,
                charge_rate=KWH,
                stations=[Station(id="s1", capacity=1, chargers=2)],
                vehicles=[],
                customers=[],
            )
        assert exc.value.invariant == "chargers-within-capacity"

    def test_overlapping_rentals(self):
        """A customer cannot hold two rentals at once"""
        with pytest.raises(InstanceValidationError) as exc:
            Instance(
                name="bad",
                battery_capacity=10 * KWH,
                charge_rate=KWH,
                stations=[Station(id="s1", capacity=1, chargers=0)],
                vehicles=[],
                customers=[Customer(id="c1", demands=[demand("s1", 0, "s1", 10, 1), demand("s1", 5, "s1", 15, 1)])],
            )
        assert exc.value.invariant == "no-overlapping-rentals"

    def test_touching_rentals_allowed(self):
        """Right-open rental periods may touch"""
        inst = Instance(
            name="ok",
            battery_capacity=10 * KWH,
            charge_rate=KWH,
            stations=[Station(id="s1", capacity=1, chargers=0)],
            vehicles=[],
            customers=[Customer(id="c1", demands=[demand("s1", 0, "s1", 10, 1), demand("s1", 10, "s1", 15, 1)])],
        )
        assert inst.customer("c1").total_rental_time == 15

    def test_energy_above_battery(self):
        """A demand cannot need more than a full battery"""
        with pytest.raises(InstanceValidationError) as exc:
            Instance(
                name="bad",
                battery_capacity=KWH,
                charge_rate=KWH,
                stations=[Station(id="s1", capacity=1, chargers=0)],
                vehicles=[],
                customers=[Customer(id="c1", demands=[demand("s1", 0, "s1", 10, 2)])],
            )
        assert exc.value.invariant == "energy-within-battery"

    def test_too_many_vehicles(self):
        """Vehicles cannot exceed a station's capacity"""
        with pytest.raises(InstanceValidationError) as exc:
            Instance(
                name="bad",
                battery_capacity=KWH,
                charge_rate=KWH,
                stations=[Station(id="s1", capacity=1, chargers=0)],
                vehicles=[
                    Vehicle(id="v1", initial_station="s1", initial_energy=KWH),
                    Vehicle(id="v2", initial_station="s1", initial_energy=KWH),
                ],
                customers=[],
            )
        assert exc.value.invariant == "vehicles-within-capacity"

    def test_unknown_customer(self, three_station):
        """Looking up a missing customer raises"""
        with pytest.raises(UnknownCustomerError):
            three_station.customer("c99")


class TestInstanceFiles:
    """Tests for instance and solution files"""

    def test_canonical_file_is_reproduced(self, three_station_path):
        """Saving a loaded canonical file gives the same bytes"""
        assert dumps_instance(load_instance(three_station_path)) == three_station_path.read_bytes()

    def test_missing_file(self, tmp_path):
        """An unreadable path is a format error"""
        with pytest.raises(InstanceFormatError):
            load_instance(tmp_path / "nope.json")

    def test_malformed_json(self, tmp_path):
        """Broken JSON is a format error"""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(InstanceFormatError):
            load_instance(path)

    def test_wrong_version(self, tmp_path):
        """Only format_version 1 is accepted"""
        path = tmp_path / "v2.json"
        path.write_text('{"format_version": 2}')
        with pytest.raises(InstanceFormatError):
            load_instance(path)

    def test_missing_field(self, tmp_path):
        """A missing key is a format error"""
        path = tmp_path / "partial.json"
        path.write_text('{"format_version": 1, "name": "x"}')
        with pytest.raises(InstanceFormatError):
            load_instance(path)

    def test_invalid_instance_in_file(self, tmp_path, three_station):
        """Invariant violations in a file surface as validation errors"""
        path = tmp_path / "bad.json"
        text = dumps_instance(three_station).decode().replace('"chargers": 1', '"chargers": 3', 1)
        path.write_text(text)
        with pytest.raises(InstanceValidationError):
            load_instance(path)

    def test_instance_save_and_load(self, tmp_path, swap):
        """A saved instance loads back to the same content"""
        save_instance(swap, tmp_path / "swap.json")
        assert dumps_instance(load_instance(tmp_path / "swap.json")) == dumps_instance(swap)

    def test_solution_save_and_load(self, tmp_path, swap):
        """A saved solution keeps its fulfillments and objective"""
        sol = compose_solution(swap, build_time_grid(swap), {"c1#0": ("s2.p1", "s1.p1"), "c2#0": ("s1.p1", "s2.p1")})
        save_solution(sol, tmp_path / "sol.json")
        back = load_solution(tmp_path / "sol.json")
        assert back.served == ["c1", "c2"]
        assert back.objective == 35
        assert back.fulfillment_map["c1#0"].dropoff_space == "s1.p1"

    def test_rationals_without_decimal_form(self):
        """Integers stay integers, exact decimals stay decimals, the rest become p/q"""
        assert _fraction_out(Fraction(4)) == 4
        assert _fraction_out(Fraction(5, 2)) == 2.5
        assert _fraction_out(Fraction(317, 50)) == 6.34
        assert _fraction_out(Fraction(1, 3)) == "1/3"
        assert _fraction_out(Fraction(1, 60000)) == "1/60000"

    def test_fraction_strings_round_trip(self, tmp_path):
        """One watt-minute and a third of a minute survive save and load exactly"""
        inst = Instance(
            name="thirds",
            battery_capacity=10 * KWH,
            charge_rate=KWH,
            stations=[Station(id="s1", capacity=1, chargers=0)],
            vehicles=[Vehicle(id="v1", initial_station="s1", initial_energy=10 * KWH)],
            customers=[Customer(id="c1", demands=[demand("s1", Fraction(1, 3), "s1", 2, Fraction(1, KWH))])],
        )
        path = tmp_path / "thirds.json"
        save_instance(inst, path)
        text = path.read_text()
        assert '"energy_kwh": "1/60000"' in text
        assert '"depart_min": "1/3"' in text
        back = load_instance(path)
        d = back.customer("c1").demands[0]
        assert d.energy == 1
        assert d.depart == Fraction(1, 3)
        assert dumps_instance(back) == dumps_instance(inst)

    def test_bad_fraction_string(self, tmp_path, swap):
        """A rational string that does not parse is a format error"""
        path = tmp_path / "bad.json"
        path.write_text(dumps_instance(swap).decode().replace('"energy_kwh": 1', '"energy_kwh": "one"', 1))
        with pytest.raises(InstanceFormatError):
            load_instance(path)


class TestTimeGrid:
    """Tests for the per-station time grid"""

    def test_station_times(self, three_station):
        """Grid times are the sorted event instants of each station"""
        grid = build_time_grid(three_station)
        assert grid.station_times["s3"] == (515, 572, 612, 628, 650)

    def test_prev_of_first_time_is_initial(self, three_station):
        """The first grid time follows the initial instant"""
        grid = build_time_grid(three_station)
        assert grid.prev("s1.p1", Fraction(448)) == T0
        assert grid.prev("s1.p1", Fraction(482)) == 448

    def test_first_increment_is_zero(self, three_station):
        """No charge accrues before the first event of a station"""
        grid = build_time_grid(three_station)
        assert grid.increment("s1.p1", Fraction(448)) == 0

    def test_increment_on_charger(self, three_station):
        """A charger adds mu per minute between grid times"""
        grid = build_time_grid(three_station)
        assert grid.increment("s1.p1", Fraction(482)) == 34 * 10200

    def test_no_increment_without_charger(self, three_station):
        """Plain spaces never charge"""
        grid = build_time_grid(three_station)
        assert grid.increment("s1.p2", Fraction(482)) == 0


class TestObjective:
    """Tests for objective evaluation"""

    def test_three_station_optimum_value(self, three_station):
        """The optimal served set of the three-station instance rents for 274 minutes"""
        assert evaluate_objective(three_station, ["c1", "c2", "c5", "c6", "c7"]) == 274

    def test_empty(self, three_station):
        """Serving nobody is worth zero"""
        assert evaluate_objective(three_station, []) == 0

    def test_unknown_customer(self, three_station):
        """Unknown ids raise"""
        with pytest.raises(UnknownCustomerError):
            evaluate_objective(three_station, ["nobody"])


class TestReplay:
    """Tests for chronological fleet replay"""

    def test_swap_is_feasible(self, swap):
        """Each vehicle drops into the space the other vacated"""
        grid = build_time_grid(swap)
        result = replay(swap, grid, {"c1#0": ("s2.p1", "s1.p1"), "c2#0": ("s1.p1", "s2.p1")})
        assert result.ok
        assert result.incoming["c2#0"] == 9 * KWH

    def test_dropoff_into_occupied_space(self, swap):
        """Dropping into a space that still holds a vehicle is flagged"""
        grid = build_time_grid(swap)
        result = replay(swap, grid, {"c1#0": ("s2.p1", "s1.p1")})
        assert not result.ok
        assert result.issues[0].check == ValidationCheck.DROPOFF_FREE
        assert result.broken

    def test_insufficient_energy(self, charging):
        """A pick-up with too little charge is flagged but not structural"""
        grid = build_time_grid(charging)
        result = replay(charging, grid, {"c1#0": ("s1.p1", "s1.p1"), "c2#0": ("s1.p1", "s1.p1")})
        assert [v.check for v in result.issues] == [ValidationCheck.PICKUP_ENERGY]
        assert not result.broken

    def test_charging_capped_at_battery(self, charging):
        """Charging from 10 to 22 fills the battery but not beyond"""
        grid = build_time_grid(charging)
        result = replay(charging, grid, {"c2#0": ("s1.p1", "s1.p1")})
        assert result.outgoing["c2#0"] == 10 * KWH

    def test_compose_rejects_inconsistent_placements(self, swap):
        """compose_solution raises on a broken trace"""
        with pytest.raises(TraceInconsistencyError):
            compose_solution(swap, build_time_grid(swap), {"c1#0": ("s2.p1", "s1.p1")})

    def test_assignment_plans(self, swap):
        """Each vehicle's plan is stay, rental, stay"""
        sol = compose_solution(swap, build_time_grid(swap), {"c1#0": ("s2.p1", "s1.p1"), "c2#0": ("s1.p1", "s2.p1")})
        plans = {plan.vehicle: plan for plan in extract_assignment_plans(swap, sol)}
        kinds = [e.kind for e in plans["v1"].events]
        assert kinds == [PlanEventKind.STAY, PlanEventKind.RENTAL, PlanEventKind.STAY]
        assert plans["v1"].rentals[0].demand == "c2#0"
        assert plans["v2"].events[-1].space == "s1.p1"
        assert plans["v2"].events[-1].end is None
