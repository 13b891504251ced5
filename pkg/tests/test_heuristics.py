"""
Heuristics Tests Module

Greedy construction and LP-based variable fixing.
"""

import pytest

from app.algorithms import LrbvfStrategy, Solver
from app.algorithms.exact import FixingLedger, fix_parking_spaces
from app.algorithms.heuristics import construct_greedy, fix_lp_zeros
from app.formulation import build_model, parked_assignment
from app.generators import generate_grid
from app.services.milp_backend import SolverParams
from app.validation import validate

PARAMS = SolverParams(time_limit_seconds=60)


class TestGreedy:
    """Tests for construct_greedy"""

    def test_longest_customer_first(self, conflict):
        """The longer of two overlapping rentals wins"""
        sol = construct_greedy(conflict)
        assert sol.served == ["c2"]
        assert sol.objective == 15

    def test_energy_rejects_customer(self, charging):
        """c1 is rejected because c2 would then lack energy"""
        sol = construct_greedy(charging)
        assert sol.served == ["c2"]
        assert sol.objective == 18

    def test_excluded(self, conflict):
        """Excluded customers are never tried"""
        assert construct_greedy(conflict, excluded=["c2"]).served == ["c1"]

    def test_prioritized(self, conflict):
        """Prioritized customers are tried first"""
        assert construct_greedy(conflict, prioritized=["c1"]).objective == 10

    def test_space_filter(self, conflict):
        """Without a usable drop-off space nobody is served"""
        sol = construct_greedy(conflict, allowed_spaces=lambda space, t: False)
        assert sol.served == []
        assert sol.objective == 0

    def test_swap_needs_both(self, swap):
        """Customers are added one at a time, so the swap pair is never found"""
        assert construct_greedy(swap).served == []

    def test_always_valid(self, tiny_suite):
        """Greedy never returns an invalid solution"""
        for inst in tiny_suite:
            assert validate(inst, construct_greedy(inst)).ok, inst.name


class TestLpZeroFixing:
    """Tests for fix_lp_zeros"""

    def test_fixes_only_zeros(self, three_station):
        """Only assignment variables at zero in the LP get fixed"""
        handle, reg = build_model(three_station)
        lp = handle.backend.solve_lp_relaxation(PARAMS)
        fixed = fix_lp_zeros(handle, reg, lp)
        assert fixed
        for v in fixed:
            assert lp.value(v) <= 1e-6
            assert handle.backend.bounds(v) == (0.0, 0.0)

    def test_second_call_fixes_nothing(self, three_station):
        """Already fixed variables are skipped"""
        handle, reg = build_model(three_station)
        lp = handle.backend.solve_lp_relaxation(PARAMS)
        fix_lp_zeros(handle, reg, lp)
        assert fix_lp_zeros(handle, reg, lp) == []

    def test_parked_solution_survives_fixings(self, three_station, tiny_suite):
        """Serving nobody stays feasible after parking and LP-zero fixings"""
        for inst in [three_station, *tiny_suite]:
            handle, reg = build_model(inst)
            backend = handle.backend
            ledger = FixingLedger(handle=handle, registry=reg)
            fix_parking_spaces(inst, inst.customer_ids, ledger)
            lp = backend.solve_lp_relaxation(PARAMS)
            ledger.record_lp_zeros(fix_lp_zeros(handle, reg, lp))
            parked = backend.as_assignment(parked_assignment(inst, reg, handle.grid))
            assert backend.check_feasible(parked) == [], inst.name


class TestLrbvf:
    """Tests for the LRBVF heuristic"""

    def test_three_station(self, three_station):
        """A valid solution no better than the optimum, bounded by the LP"""
        result = Solver(LrbvfStrategy(), PARAMS).solve(three_station)
        assert result.objective <= 274
        assert result.best_bound >= 274 - 1e-6
        assert validate(three_station, result.solution).ok
        assert result.diagnostics["lp_zero_fixed"] > 0

    def test_swap(self, swap):
        """LRBVF stays valid where greedy finds nothing"""
        result = Solver(LrbvfStrategy(), PARAMS).solve(swap)
        assert validate(swap, result.solution).ok
        assert result.objective in (0, 35)


@pytest.mark.slow
class TestLrbvfOnBenchmarks:
    """Tests LRBVF on generated benchmark instances of 30 to 60 customers"""

    def test_grid_solutions_valid(self, grid_runs):
        """Every LRBVF solution passes the validator"""
        for inst, result, _ in grid_runs:
            assert result.solution is not None, inst.name
            report = validate(inst, result.solution)
            assert report.ok, f"{inst.name}: {report.to_text()}"

    def test_no_worse_than_greedy(self, grid_runs):
        """LRBVF matches or beats the greedy construction on nine instances in ten"""
        at_least_greedy = sum(1 for _, result, greedy in grid_runs if result.objective >= float(greedy.objective) - 1e-6)
        assert at_least_greedy >= 0.9 * len(grid_runs)


# ===========================================
# Fixtures
# ===========================================

@pytest.fixture(scope="module")
def grid_runs():
    """LRBVF result and greedy solution for a hundred seeded grid instances"""
    runs = []
    for seed in range(100):
        inst = generate_grid(30 + seed % 31, seed)
        result = Solver(LrbvfStrategy(), PARAMS).solve(inst)
        runs.append((inst, result, construct_greedy(inst)))
    return runs
