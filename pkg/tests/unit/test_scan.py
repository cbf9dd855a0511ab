"""
Unit tests for parameter scans
"""

import io
import math

import numpy as np
import pytest
from pydantic import ValidationError

from cavcool.amplitudes import rates_weak_drive
from cavcool.emission import EmissionPattern
from cavcool.models import SystemParams
from cavcool.records import read_csv
from cavcool.scan import (
    ERROR,
    HEATING,
    Engine,
    ScanAxis,
    ScanCell,
    ScanSpec,
    delta_opt_curve,
    local_minima,
    run_scan,
)


def weak_drive_base() -> SystemParams:
    return SystemParams(kappa=1.0, delta=10.0, omega=0.1)


class TestScanAxis:
    """Test axis parsing and validation"""

    def test_parse(self):
        axis = ScanAxis.parse("delta_c:-2:1.5:351")
        assert axis.name == "delta_c"
        assert axis.points == 351
        assert axis.values()[0] == -2.0
        assert axis.values()[-1] == 1.5

    def test_alias_maps_to_field(self):
        assert ScanAxis.parse("theta_L:0:1:3").name == "theta_l"

    def test_malformed(self):
        with pytest.raises(ValueError):
            ScanAxis.parse("delta_c:-2:1.5")

    def test_unknown_parameter(self):
        with pytest.raises(ValidationError):
            ScanAxis(name="detuning", start=0, stop=1, points=3)

    def test_drive_cannot_be_scanned(self):
        with pytest.raises(ValidationError):
            ScanAxis(name="drive", start=0, stop=1, points=3)

    def test_needs_two_points(self):
        with pytest.raises(ValidationError):
            ScanAxis(name="eta", start=0, stop=1, points=1)


class TestScanSpec:
    """Test scan definitions"""

    def test_repeated_axis(self):
        axis = ScanAxis(name="kappa", start=0.1, stop=1, points=3)
        with pytest.raises(ValidationError):
            ScanSpec(axis1=axis, axis2=axis)

    def test_optimum_line_fixes_delta(self):
        with pytest.raises(ValidationError):
            ScanSpec(axis1=ScanAxis(name="delta", start=1, stop=2, points=2), follow_optimum=True)

    def test_unknown_output(self):
        with pytest.raises(ValidationError):
            ScanSpec(axis1=ScanAxis(name="eta", start=0.1, stop=0.2, points=2), outputs=["t"])


class TestRunScan:
    """Test scans over the analytic and numerical engines"""

    def test_occupation_independent_of_lamb_dicke(self):
        spec = ScanSpec(axis1=ScanAxis(name="eta", start=0.05, stop=0.2, points=4))
        result = run_scan(spec, workers=1)
        n_st = result.line("n_st")
        assert np.all(np.abs(n_st - n_st[0]) <= 1e-12 * n_st[0])
        w = result.line("w")
        assert w[-1] / w[0] == pytest.approx(16.0)

    def test_divergent_optimum_recorded(self):
        spec = ScanSpec(
            axis1=ScanAxis(name="delta_c", start=-2.0, stop=0.0, points=5), follow_optimum=True
        )
        result = run_scan(spec, workers=1)
        diverged = result.cell(2)
        assert diverged.x == -1.0
        assert diverged.error == "divergent_optimum"
        assert diverged.output("n_st") == ERROR
        assert result.cell(4).error is None
        assert result.cell(4).delta == pytest.approx(48.025)

    def test_row_major_two_dimensional(self):
        spec = ScanSpec(
            axis1=ScanAxis(name="kappa", start=0.01, stop=0.1, points=2),
            axis2=ScanAxis(name="delta_c", start=-0.5, stop=0.5, points=3),
            follow_optimum=True,
        )
        result = run_scan(spec, workers=1)
        assert len(result.cells) == 6
        cell = result.cell(1, 2)
        assert (cell.i, cell.j) == (1, 2)
        assert cell.x == 0.1
        assert cell.y == 0.5

    def test_arithmetic_failure_recorded(self, monkeypatch):
        def undefined(spec, p):
            if p.delta_c > 0:
                raise ZeroDivisionError("float division by zero")
            return rates_weak_drive(p, EmissionPattern())

        monkeypatch.setattr("cavcool.scan.cell_rates", undefined)
        spec = ScanSpec(axis1=ScanAxis(name="delta_c", start=-0.5, stop=0.5, points=2))
        result = run_scan(spec, workers=1)
        assert result.cell(0).error is None
        assert result.cell(1).error == "numeric_error"
        assert result.cell(1).output("n_st") == ERROR

    def test_parallel_matches_serial(self):
        spec = ScanSpec(axis1=ScanAxis(name="delta_c", start=-0.5, stop=0.5, points=4))
        serial = run_scan(spec, workers=1)
        parallel = run_scan(spec, workers=2)
        assert np.array_equal(serial.line("a_minus"), parallel.line("a_minus"))

    def test_liouvillian_engine_matches_analytic(self):
        axis = ScanAxis(name="delta_c", start=-3.0, stop=-2.0, points=2)
        analytic = run_scan(ScanSpec(base=weak_drive_base(), axis1=axis), workers=1)
        numerical = run_scan(
            ScanSpec(base=weak_drive_base(), axis1=axis, engine=Engine.LIOUVILLIAN, n_cavity=4),
            workers=1,
        )
        for name in ("a_plus", "a_minus"):
            assert np.allclose(numerical.line(name), analytic.line(name), rtol=0.01)

    def test_csv_layout(self):
        spec = ScanSpec(
            axis1=ScanAxis(name="delta_c", start=-1.0, stop=0.0, points=2),
            outputs=["n_st", "w"],
            follow_optimum=True,
        )
        buffer = io.StringIO()
        run_scan(spec, workers=1).write_csv(buffer)
        buffer.seek(0)
        metadata, header, rows = read_csv(buffer)
        assert header == ["delta_c", "delta", "n_st", "w", "status", "error"]
        assert rows[0][1:] == [ERROR, ERROR, ERROR, "error", "divergent_optimum"]
        assert rows[1][-2:] == ["ok", ""]
        assert metadata["follow_optimum"] == "true"


class TestCellOutput:
    """Test sentinels of heating and failed cells"""

    def test_heating_sentinel(self):
        cell = ScanCell(i=0, j=0, x=0.0, y=None, values={"w": -1e-3}, heating=True)
        assert cell.output("n_st") == HEATING
        assert cell.output("w") == -1e-3
        assert cell.status == "heating"

    def test_error_marker(self):
        cell = ScanCell(i=0, j=0, x=0.0, y=None, error="pole_at_resonance")
        assert cell.output("w") == ERROR
        assert cell.status == "error"


class TestHelpers:
    """Test the optimum curve and minimum search"""

    def test_delta_opt_curve(self):
        curve = delta_opt_curve(SystemParams(), [-1.0, 0.0])
        assert curve[0] == (-1.0, None)
        assert curve[1][1] == pytest.approx(48.025)

    def test_local_minima(self):
        assert local_minima([3.0, 1.0, 2.0, 0.5, math.nan, 0.1, 4.0]) == [1]
