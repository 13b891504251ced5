"""
Oracle Tests Module

Exhaustive solving and non-monotone witness search, plus agreement of the
MILP methods with enumeration on seeded tiny instances.
"""

import pytest

from app.algorithms import Evsp3Strategy, LrbvfStrategy, RcbvfStrategy, Solver
from app.core.time_grid import build_time_grid
from app.errors import SizeCapExceededError
from app.formulation import build_model, extract_solution
from app.oracle import OracleLimits, find_nonmonotone_witness, solve_exhaustive, subset_placements
from app.services.milp_backend import SolverParams, SolveStatus
from app.validation import validate

from tests.conftest import assert_flows_conserved

PARAMS = SolverParams(time_limit_seconds=60)


class TestExhaustive:
    """Tests for solve_exhaustive"""

    def test_swap(self, swap):
        """Enumeration finds the pair"""
        result = solve_exhaustive(swap)
        assert result.objective == 35
        assert result.served == ["c1", "c2"]
        assert result.subsets_checked == 1
        assert validate(swap, result.solution).ok

    def test_charging(self, charging):
        """The best servable subset is c2 alone"""
        result = solve_exhaustive(charging)
        assert result.objective == 18
        assert result.served == ["c2"]

    def test_three_station(self, three_station):
        """Enumeration agrees with the known optimum"""
        assert solve_exhaustive(three_station).objective == 274

    def test_size_cap(self, swap):
        """Instances above a cap are refused"""
        with pytest.raises(SizeCapExceededError):
            solve_exhaustive(swap, OracleLimits(max_customers=1))

    def test_subset_placements(self, swap):
        """Single customers of the swap cannot be placed"""
        assert subset_placements(swap, ["c1"]) is None
        assert subset_placements(swap, ["c2"]) is None
        assert subset_placements(swap, []) == {}


class TestWitness:
    """Tests for find_nonmonotone_witness"""

    def test_strict(self, swap):
        """No single customer of the swap fits, both together do"""
        witness = find_nonmonotone_witness([swap], strict=True)
        assert witness.k == 1
        assert witness.infeasible == ["c1"]
        assert witness.feasible == ["c1", "c2"]
        assert witness.strict

    def test_non_strict(self, swap):
        """The first failing subset drops c1 from the pair"""
        witness = find_nonmonotone_witness([swap])
        assert witness.k == 1
        assert witness.infeasible == ["c2"]
        assert not witness.strict

    def test_monotone_instance(self, conflict):
        """Overlapping customers give no witness"""
        assert find_nonmonotone_witness([conflict]) is None

    def test_oversized_skipped(self, swap, conflict):
        """Instances above the caps are skipped, not raised"""
        assert find_nonmonotone_witness([swap, conflict], limits=OracleLimits(max_vehicles=1)) is None


@pytest.mark.slow
class TestAgreement:
    """Tests that the MILP methods match enumeration"""

    def test_evsp3_matches_oracle(self, oracle_suite):
        """The direct model reaches the enumerated optimum with integral implicit binaries"""
        for inst in oracle_suite:
            expected = float(solve_exhaustive(inst).objective)
            grid = build_time_grid(inst)
            handle, reg = build_model(inst, relax_implicit=True, grid=grid)
            outcome = handle.backend.solve_mip(PARAMS)
            assert outcome.status == SolveStatus.OPTIMAL, inst.name
            for family in (reg.w, reg.y, reg.z_out, reg.z_in):
                for v in family.values():
                    value = outcome.value(v)
                    assert min(abs(value), abs(value - 1)) <= 1e-6, f"{inst.name} {v.name}"
            sol = extract_solution(inst, reg, outcome, grid)
            assert float(sol.objective) == pytest.approx(expected), inst.name
            assert_flows_conserved(inst, sol)
            assert validate(inst, sol).ok, inst.name

    def test_evsp3_strategy_matches_oracle(self, oracle_suite):
        """The warm-started strategy agrees with enumeration"""
        for inst in oracle_suite:
            expected = float(solve_exhaustive(inst).objective)
            result = Solver(Evsp3Strategy(), PARAMS).solve(inst)
            assert result.objective == pytest.approx(expected), inst.name
            assert validate(inst, result.solution).ok, inst.name

    def test_rcbvf_matches_oracle(self, oracle_suite):
        """Variable fixing never cuts off the optimum and rarely grows the final tree"""
        no_larger = 0
        for inst in oracle_suite:
            expected = float(solve_exhaustive(inst).objective)
            result = Solver(RcbvfStrategy(maxrun_seconds=5), PARAMS).solve(inst)
            assert result.objective == pytest.approx(expected), inst.name
            assert validate(inst, result.solution).ok, inst.name
            assert_flows_conserved(inst, result.solution)
            plain = Solver(Evsp3Strategy(warm_start=False), PARAMS).solve(inst)
            if result.diagnostics["final_node_count"] <= plain.node_count:
                no_larger += 1
        assert no_larger >= 0.6 * len(oracle_suite)

    def test_lrbvf_close_to_oracle(self, oracle_suite):
        """The heuristic stays valid and collects nine tenths of the enumerated optima"""
        heuristic = optimum = 0.0
        for inst in oracle_suite:
            optimum += float(solve_exhaustive(inst).objective)
            result = Solver(LrbvfStrategy(), PARAMS).solve(inst)
            assert validate(inst, result.solution).ok, inst.name
            heuristic += result.objective
        assert heuristic >= 0.9 * optimum
