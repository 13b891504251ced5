"""
Exact Method Tests Module

Parking-space fixing, the fixing ledger, reduced-cost fixing, warm-start
repair and the full RCBVF run.
"""

from fractions import Fraction

import pytest

from app.algorithms import RcbvfStrategy, Solver
from app.algorithms.exact import (
    FixingLedger,
    fix_parking_spaces,
    parking_fixings,
    reduced_cost_fix,
    repair_warm_start,
)
from app.algorithms.heuristics import fix_lp_zeros
from app.core.replay import compose_solution
from app.core.time_grid import build_time_grid
from app.errors import IrreparableWarmStartError
from app.formulation import build_model
from app.schemas.reports import RunStatus
from app.services.milp_backend import SolverParams
from app.validation import validate

PARAMS = SolverParams(time_limit_seconds=60)


class TestParkingFixings:
    """Tests for the per-station parking fixing rule"""

    def test_all_customers(self, spread):
        """Two arrivals at s2 need the charger and one plain space"""
        fixings = parking_fixings(spread, build_time_grid(spread), spread.customer_ids)
        assert fixings == {"s2.p3": [10, 12]}

    def test_one_customer(self, spread):
        """A single arrival only needs the charger space"""
        fixings = parking_fixings(spread, build_time_grid(spread), ["c1"])
        assert fixings == {"s2.p2": [10, 12], "s2.p3": [10, 12]}

    def test_no_customers(self, spread):
        """Without arrivals every empty space is fixed"""
        fixings = parking_fixings(spread, build_time_grid(spread), [])
        assert set(fixings) == {"s2.p1", "s2.p2", "s2.p3"}

    def test_occupied_spaces_never_fixed(self, spread):
        """Initially occupied spaces stay free"""
        fixings = parking_fixings(spread, build_time_grid(spread), [])
        assert not any(space.startswith("s1.") for space in fixings)

    @pytest.mark.parametrize("every_other", [False, True])
    def test_arity_bound(self, tiny_suite, three_station, spread, every_other):
        """Empty spaces left free at a time never outnumber the arrivals they could take"""
        for inst in [*tiny_suite, three_station, spread]:
            customers = inst.customer_ids[::2] if every_other else inst.customer_ids
            grid = build_time_grid(inst)
            fixings = parking_fixings(inst, grid, customers)
            chosen = set(customers)
            for sid in inst.station_ids:
                empty = [p.id for p in inst.spaces_by_station[sid] if p.id not in inst.initial_placement]
                arrivals = sum(
                    1 for ref in inst.demand_refs
                    if ref.customer_id in chosen and ref.demand.inter_station and ref.demand.dropoff_station == sid
                )
                for t in grid.station_times[sid]:
                    free = [p for p in empty if t not in fixings.get(p, [])]
                    assert len(free) <= min(len(empty), arrivals), f"{inst.name} {sid} {t}"


class TestFixingLedger:
    """Tests for grouped fixings"""

    def test_fix_and_release_parking(self, ledger):
        """y and z_in of s2.p3 are fixed at both arrival times, then released"""
        count = ledger.fix_parking({"s2.p3": [Fraction(10), Fraction(12)]})
        assert count == 4
        assert not ledger.space_usable("s2.p3", Fraction(10))
        assert ledger.space_usable("s2.p1", Fraction(10))
        ledger.release_parking()
        assert ledger.counts()["parking"] == 0
        assert not ledger.backend.is_fixed(ledger.registry.y[("s2.p3", Fraction(10))])

    def test_customer_fixings(self, ledger):
        """Customer fixings are counted and listed"""
        ledger.fix_customer("c1", 1)
        ledger.fix_customer("c2", 0)
        counts = ledger.counts()
        assert counts["w_one"] == 1
        assert counts["w_zero"] == 1
        assert ledger.customer_fixed("c1") == 1
        assert ledger.customer_fixed("nobody") is None
        assert "w[c2] = 0" in ledger.to_text()

    def test_to_text_lists_spaces(self, ledger):
        """The text export groups parking fixings by space"""
        ledger.fix_parking({"s2.p3": [Fraction(10)]})
        text = ledger.to_text()
        assert text.startswith("parking fixings: 2")
        assert "s2.p3: y@10 z_in@10" in text

    def test_release_restores_bounds(self, three_station):
        """Parking and LP-zero fixings released in turn give back the original bounds"""
        handle, reg = build_model(three_station)
        backend = handle.backend
        ledger = FixingLedger(handle=handle, registry=reg)
        before = backend.bound_vectors()
        assert fix_parking_spaces(three_station, three_station.customer_ids, ledger) > 0
        lp = backend.solve_lp_relaxation(PARAMS)
        ledger.record_lp_zeros(fix_lp_zeros(handle, reg, lp))
        assert ledger.counts()["lp_zero"] > 0
        assert backend.bound_vectors() != before
        ledger.release_lp_zeros()
        ledger.release_parking()
        assert backend.bound_vectors() == before


class TestReducedCostFix:
    """Tests for the reduced-cost decision rule"""

    def test_decisions(self):
        """Only reduced costs beyond the gap fix a customer"""
        decisions = reduced_cost_fix(100, 90, {"a": 15, "b": -12, "c": 5, "d": 10}, margin=0)
        assert decisions == {"a": 1, "b": 0}

    def test_margin_widens_threshold(self):
        """A margin keeps borderline customers free"""
        assert reduced_cost_fix(100, 90, {"a": 15}, margin=0.1) == {}

    def test_zero_gap(self):
        """At a proven optimum any nonzero reduced cost fixes"""
        assert reduced_cost_fix(50, 50, {"a": 0.5, "b": -0.5, "c": 0}, margin=0) == {"a": 1, "b": 0}


class TestRepairWarmStart:
    """Tests for moving stays off fixed spaces"""

    def test_moves_to_charger(self, spread, ledger):
        """With both plain spaces fixed, c1 is moved to the charger space"""
        grid = ledger.handle.grid
        ledger.fix_parking(parking_fixings(spread, grid, ["c1"]))
        sol = compose_solution(spread, grid, {"c1#0": ("s1.p1", "s2.p2")})
        repaired = repair_warm_start(spread, sol, ledger)
        assert repaired.fulfillment_map["c1#0"].dropoff_space == "s2.p1"
        assert repaired.objective == sol.objective
        assert validate(spread, repaired).ok

    def test_unblocked_unchanged(self, spread, ledger):
        """A solution clear of the fixings is returned as is"""
        sol = compose_solution(spread, ledger.handle.grid, {"c1#0": ("s1.p1", "s2.p1")})
        assert repair_warm_start(spread, sol, ledger) is sol

    def test_served_customer_fixed_to_zero(self, spread, ledger):
        """Serving a customer whose w is fixed to 0 cannot be repaired"""
        ledger.fix_customer("c1", 0)
        sol = compose_solution(spread, ledger.handle.grid, {"c1#0": ("s1.p1", "s2.p1")})
        with pytest.raises(IrreparableWarmStartError):
            repair_warm_start(spread, sol, ledger)

    def test_required_customer_missing(self, spread, ledger):
        """Leaving out a customer whose w is fixed to 1 cannot be repaired"""
        ledger.fix_customer("c2", 1)
        sol = compose_solution(spread, ledger.handle.grid, {"c1#0": ("s1.p1", "s2.p1")})
        with pytest.raises(IrreparableWarmStartError):
            repair_warm_start(spread, sol, ledger)


class TestRcbvf:
    """Tests for the full RCBVF run"""

    def test_three_station_optimum(self, three_station):
        """RCBVF proves the optimum of 274"""
        result = Solver(RcbvfStrategy(maxrun_seconds=5), PARAMS).solve(three_station)
        assert result.status == RunStatus.OPTIMAL
        assert result.objective == 274
        assert validate(three_station, result.solution).ok
        diagnostics = result.diagnostics
        assert diagnostics["lp_bound"] >= 274 - 1e-6
        assert diagnostics["incumbent_source"] in ("bounded-solve", "greedy")
        assert result.ledger_text.startswith("parking fixings:")

    def test_swap(self, swap):
        """Reduced-cost fixing keeps the pair that only works together"""
        result = Solver(RcbvfStrategy(maxrun_seconds=5), PARAMS).solve(swap)
        assert result.objective == 35
        assert validate(swap, result.solution).ok

    def test_spread(self, spread):
        """Both customers fit at s2 after parking fixing"""
        result = Solver(RcbvfStrategy(maxrun_seconds=5), PARAMS).solve(spread)
        assert result.objective == 17
        assert result.solution.served == ["c1", "c2"]


# ===========================================
# Fixtures
# ===========================================

@pytest.fixture
def ledger(spread):
    handle, reg = build_model(spread)
    return FixingLedger(handle=handle, registry=reg)
