"""
Integration tests for the cavcool command line

Each test drives ``main`` with an argument list, the way the installed
``cavcool`` script does, and checks exit codes and written tables.
"""

import json

import pytest

from cavcool.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from cavcool.records import read_csv


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep a cavcool.yaml of the developer out of the tests"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.setenv("CAVCOOL_WORKERS", "1")


class TestRates:
    """Test the rates command"""

    def test_prints_rates_and_limits(self, capsys):
        assert main(["rates", "--log-level", "WARNING"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "Cooling rates:" in out
        assert "n_st = " in out
        assert "sideband" in out

    def test_json_report(self, tmp_path, capsys):
        report = tmp_path / "rates.json"
        assert main(["rates", "--delta-c", "-0.5", "--optimal-delta", "--json", str(report)]) == 0
        data = json.loads(report.read_text())
        assert data["params"]["delta_c"] == -0.5
        assert data["rates"]["a_minus"] > data["rates"]["a_plus"]
        assert data["numerical"] is None

    def test_evolution_table(self, tmp_path):
        table = tmp_path / "evolution.csv"
        assert main(["rates", "--evolve", str(table), "--n-times", "11"]) == EXIT_OK
        with open(table) as f:
            metadata, header, rows = read_csv(f)
        assert header == ["time", "mean_n", "closed_form", "p0", "purity"]
        assert len(rows) == 11
        assert rows[0][1:] == ["2.0", "2.0", "0.0", "1.0"]
        for row in rows[1:]:
            assert float(row[1]) == pytest.approx(float(row[2]), rel=1e-6)
        assert float(rows[-1][3]) > 0.9
        assert metadata["engine"] == "rate_equation"

    def test_undriven(self, capsys):
        assert main(["rates", "--omega", "0"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "no drive" in out
        assert "n_st = undefined" in out

    def test_uncoupled_atom_lists_limits(self, capsys):
        assert main(["rates", "--g", "0", "--delta-c", "0", "--delta", "-5"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "interference (δc=0)" in out
        assert "degenerate_coupling" in out

    def test_no_spontaneous_emission_lists_limits(self, capsys):
        argv = ["rates", "--gamma", "0", "--g", "0.5", "--delta-c", "0", "--delta", "-5"]
        assert main(argv) == EXIT_OK
        assert "regime_mismatch" in capsys.readouterr().out

    def test_pole_is_a_runtime_failure(self, capsys):
        code = main(["rates", "--gamma", "0", "--kappa", "0", "--delta-c", "0", "--delta", "48"])
        assert code == EXIT_FAILURE
        assert "PoleAtResonance" in capsys.readouterr().out

    def test_config_file_and_set(self, tmp_path, capsys):
        path = tmp_path / "custom.yaml"
        path.write_text("system:\n  kappa: 0.1\n")
        report = tmp_path / "rates.json"
        argv = ["rates", "--config", str(path), "--set", "system.eta=0.2", "--json", str(report)]
        assert main(argv) == EXIT_OK
        params = json.loads(report.read_text())["params"]
        assert params["kappa"] == 0.1
        assert params["eta"] == 0.2

    def test_bad_override(self, capsys):
        assert main(["rates", "--set", "system.gamma=-1"]) == EXIT_USAGE
        assert "Configuration error" in capsys.readouterr().err

    def test_malformed_set(self, capsys):
        assert main(["rates", "--set", "gamma"]) == EXIT_USAGE


class TestScan:
    """Test the scan command"""

    def test_writes_table(self, tmp_path, capsys):
        output = tmp_path / "scan.csv"
        argv = ["scan", "--axis1", "delta_c:-0.5:0.5:3", "--outputs", "n_st,w", "--output", str(output)]
        assert main(argv) == EXIT_OK
        with open(output) as f:
            metadata, header, rows = read_csv(f)
        assert header == ["delta_c", "delta", "n_st", "w", "status", "error"]
        assert [row[0] for row in rows] == ["-0.5", "0.0", "0.5"]
        assert metadata["engine"] == "analytic"
        assert "✓ Scanned 3 cells" in capsys.readouterr().err

    def test_curve_and_gnuplot(self, tmp_path):
        curve = tmp_path / "curve.csv"
        matrix = tmp_path / "matrix.dat"
        argv = [
            "scan",
            "--axis1", "delta_c:-1:0:3",
            "--axis2", "kappa:0.01:0.1:2",
            "--output", str(tmp_path / "scan.csv"),
            "--curve", str(curve),
            "--gnuplot", str(matrix),
        ]  # fmt: skip
        assert main(argv) == EXIT_OK
        with open(curve) as f:
            _, header, rows = read_csv(f)
        assert header == ["delta_c", "delta_opt"]
        assert rows[0][1] == "inf"
        assert len(matrix.read_text().strip().split("\n\n")) == 3

    def test_malformed_axis(self, capsys):
        assert main(["scan", "--axis1", "delta_c:1"]) == EXIT_USAGE


class TestSpectrum:
    """Test the spectrum command"""

    def test_grid_and_markers(self, tmp_path):
        output = tmp_path / "spectrum.csv"
        argv = ["spectrum", "--start", "-60", "--stop", "60", "--points", "241", "--output", str(output)]
        assert main(argv) == EXIT_OK
        with open(output) as f:
            metadata, header, rows = read_csv(f)
        assert header == ["delta", "rate", "marker"]
        assert len(rows) == 241
        assert all(float(row[1]) >= 0.0 for row in rows)
        assert "lambda_plus" in metadata


class TestMcwf:
    """Test the Monte Carlo command"""

    ARGV = [
        "mcwf",
        "--set", "mcwf.n_cavity=2",
        "--set", "mcwf.n_motion=4",
        "--set", "mcwf.initial_n=0",
        "--t-max", "2",
        "--n-times", "3",
        "--trajectories", "1",
        "--seed", "5",
        "--workers", "1",
    ]  # fmt: skip

    def test_rerun_is_byte_identical(self, tmp_path):
        first, second = tmp_path / "first.csv", tmp_path / "second.csv"
        assert main(self.ARGV + ["--output", str(first)]) == EXIT_OK
        assert main(self.ARGV + ["--output", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()
        with open(first) as f:
            metadata, header, rows = read_csv(f)
        assert header[:2] == ["time", "mean_n"]
        assert len(rows) == 3
        assert metadata["seed"] == "5"

    def test_binary_and_json(self, tmp_path):
        binary, summary = tmp_path / "ensemble.cctr", tmp_path / "summary.json"
        argv = self.ARGV + ["--output", str(tmp_path / "out.csv")]
        assert main(argv + ["--binary", str(binary), "--json", str(summary)]) == EXIT_OK
        assert binary.read_bytes()[:4] == b"CCTR"
        assert json.loads(summary.read_text())["n_trajectories"] == 1

    def test_invalid_grid(self):
        assert main(self.ARGV + ["--n-times", "1"]) == EXIT_USAGE


class TestValidate:
    """Test the validate command"""

    def test_selected_criteria(self, tmp_path, capsys):
        report = tmp_path / "report.md"
        argv = ["validate", "--criteria", "1,8", "--quick", "--workers", "1", "--markdown", str(report)]
        assert main(argv) == EXIT_OK
        assert "2/2 criteria passed: PASS" in capsys.readouterr().out
        assert "| 8 |" in report.read_text()

    def test_unknown_criterion(self):
        assert main(["validate", "--criteria", "99"]) == EXIT_USAGE

    def test_malformed_criteria(self):
        assert main(["validate", "--criteria", "one"]) == EXIT_USAGE


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().out.lower()
