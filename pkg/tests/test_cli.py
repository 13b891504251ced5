"""
CLI Tests Module

Commands run through main() with their exit codes and output.
"""

import pandas as pd

from app.config import get_settings
from app.main import EXIT_INVALID, EXIT_OK, main
from app.utils.logger import setup_logger


class TestSolve:
    """Tests for the solve command"""

    def test_greedy_with_output(self, three_station_path, tmp_path, capsys):
        """A solved and validated run exits 0 and writes the solution"""
        out = tmp_path / "sol.json"
        code = main(["solve", str(three_station_path), "--algo", "greedy", "--out", str(out), "--plans"])
        assert code == EXIT_OK
        assert out.exists()
        printed = capsys.readouterr().out
        assert "status:     feasible" in printed
        assert "v1:" in printed
        assert printed.rstrip().endswith("three_station: ok")

    def test_missing_instance(self, tmp_path):
        """An unreadable instance exits 2"""
        assert main(["solve", str(tmp_path / "gone.json")]) == EXIT_INVALID

    def test_write_lp(self, three_station_path, tmp_path):
        """The model can be exported before solving"""
        lp = tmp_path / "three_station.lp"
        code = main(["solve", str(three_station_path), "--algo", "evsp3", "--time-limit", "60", "--write-lp", str(lp)])
        assert code == EXIT_OK
        assert lp.exists()


class TestFiles:
    """Tests for generate, validate and reduce"""

    def test_generate(self, tmp_path, capsys):
        """A tiny instance is written where asked"""
        out = tmp_path / "tiny.json"
        assert main(["generate", "tiny", "--customers", "4", "--seed", "3", "--out", str(out)]) == EXIT_OK
        assert out.exists()
        assert capsys.readouterr().out.strip() == str(out)

    def test_log_level_option(self, tmp_path, capsys):
        """A quieter console level leaves stdout unchanged"""
        out = tmp_path / "grid.json"
        try:
            code = main(["--log-level", "ERROR", "generate", "grid", "--customers", "10", "--out", str(out)])
        finally:
            setup_logger()
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == str(out)

    def test_validate(self, three_station_path, tmp_path, capsys):
        """A saved solution validates against its instance"""
        sol = tmp_path / "sol.json"
        main(["solve", str(three_station_path), "--algo", "greedy", "--out", str(sol)])
        capsys.readouterr()
        assert main(["validate", str(three_station_path), str(sol)]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "three_station: ok"

    def test_reduce(self, tmp_path, capsys):
        """An edge list becomes an instance file"""
        graph = tmp_path / "tri.txt"
        graph.write_text("a b\nb c\nc a\n")
        out = tmp_path / "tri.json"
        assert main(["reduce", "misp", str(graph), "--out", str(out)]) == EXIT_OK
        assert capsys.readouterr().out.strip() == f"{out} K=2"
        assert out.exists()

    def test_reduce_bad_graph(self, tmp_path):
        """A self-loop is invalid input"""
        graph = tmp_path / "loop.txt"
        graph.write_text("a a\n")
        assert main(["reduce", "misp", str(graph)]) == EXIT_INVALID


class TestOracle:
    """Tests for the oracle commands"""

    def test_solve(self, tmp_path, capsys):
        """A generated tiny instance is solved by enumeration"""
        path = tmp_path / "tiny.json"
        main(["generate", "tiny", "--customers", "3", "--seed", "1", "--out", str(path)])
        capsys.readouterr()
        assert main(["oracle", "solve", str(path)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("objective: ")

    def test_oversized(self, three_station_path, monkeypatch):
        """Instances above the caps exit 2"""
        monkeypatch.setenv("EVSP_ORACLE_MAX_CUSTOMERS", "2")
        get_settings.cache_clear()
        try:
            assert main(["oracle", "solve", str(three_station_path)]) == EXIT_INVALID
        finally:
            monkeypatch.delenv("EVSP_ORACLE_MAX_CUSTOMERS")
            get_settings.cache_clear()


class TestBench:
    """Tests for the bench command"""

    def test_csv_tables(self, three_station_path, tmp_path):
        """Runs, profile and bound-gap tables are written"""
        runs, profile, compare = tmp_path / "runs.csv", tmp_path / "profile.csv", tmp_path / "gap.csv"
        code = main([
            "bench", str(three_station_path), "--algo", "greedy", "--workers", "1",
            "--out", str(runs), "--profile", str(profile), "--compare", str(compare),
        ])
        assert code == EXIT_OK
        frame = pd.read_csv(runs)
        assert list(frame["instance"]) == ["three_station", "SUMMARY"]
        assert frame["pct_optimal"].iloc[-1] == 0.0
        assert profile.exists()
        assert compare.exists()

    def test_repeated_time_limits(self, three_station_path, tmp_path):
        """Each time limit gets its own run row"""
        runs = tmp_path / "runs.csv"
        code = main([
            "bench", str(three_station_path), "--algo", "greedy", "--workers", "1",
            "--time-limit", "5", "--time-limit", "10", "--out", str(runs),
        ])
        assert code == EXIT_OK
        frame = pd.read_csv(runs)
        assert list(frame["instance"]) == ["three_station", "three_station", "SUMMARY"]
        assert list(frame["time_limit_seconds"].iloc[:2]) == [5.0, 10.0]
