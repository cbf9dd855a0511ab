"""
Unit tests for the acceptance suite driver and its report rendering
"""

import json

import pytest

from cavcool import validation
from cavcool.errors import PoleAtResonance
from cavcool.reports.validation_report import render_json, render_markdown, render_text
from cavcool.validation import CriterionResult, ValidationReport, run_validation


def _report(passed: bool = True) -> ValidationReport:
    results = [
        CriterionResult(
            number=1,
            name="Interference null",
            target="|T_S| = 0",
            measured="0.00e+00",
            tolerance="1e-12",
            passed=True,
            elapsed=0.5,
        ),
        CriterionResult(
            number=8,
            name="Detailed balance",
            target="p_{n+1}/p_n = A+/A−",
            measured="3.1e-14",
            tolerance="1e-10",
            passed=passed,
            error=None if passed else "truncation_leak",
        ),
    ]
    return ValidationReport(results=results, quick=True)


class TestRunValidation:
    """Test criterion selection and failure capture"""

    def test_closed_form_criteria_pass(self):
        report = run_validation([1, 4, 8], quick=True, workers=1)
        assert [result.number for result in report.results] == [1, 4, 8]
        assert report.passed, [result.measured for result in report.failures]
        assert all(result.elapsed >= 0.0 for result in report.results)

    def test_unknown_criterion(self):
        with pytest.raises(ValueError):
            run_validation([42])

    def test_raising_criterion_is_recorded(self, monkeypatch):
        def broken(quick, workers):
            """Always hits a pole"""
            raise PoleAtResonance("f(+1)", 0j)

        monkeypatch.setitem(validation.CRITERIA, 1, broken)
        report = run_validation([1], quick=True)
        assert not report.passed
        assert report.results[0].error == "pole_at_resonance"
        assert report.results[0].name == "Always hits a pole"

    def test_arithmetic_failure_is_recorded(self, monkeypatch):
        def broken(quick, workers):
            """Divides by a vanishing width"""
            return 1.0 / 0.0

        monkeypatch.setitem(validation.CRITERIA, 4, broken)
        report = run_validation([1, 4], quick=True, workers=1)
        assert [result.number for result in report.results] == [1, 4]
        assert report.results[0].passed
        assert report.results[1].error == "numeric_error"
        assert not report.passed


class TestRendering:
    """Test text, Markdown and JSON renderings"""

    def test_text(self):
        text = render_text(_report())
        assert "✓ [1] Interference null  (0.5s)" in text
        assert "2/2 criteria passed: PASS" in text
        assert "quick mode" in text

    def test_text_failure(self):
        text = render_text(_report(passed=False))
        assert "✗ [8] Detailed balance" in text
        assert "FAIL (truncation_leak)" in text
        assert "1/2 criteria passed: FAIL" in text

    def test_markdown_table(self):
        markdown = render_markdown(_report())
        rows = [line for line in markdown.splitlines() if line.startswith("| 8 ")]
        assert rows == ["| 8 | Detailed balance | p_{n+1}/p_n = A+/A− | 3.1e-14 | 1e-10 | PASS |"]

    def test_json(self):
        data = json.loads(render_json(_report(passed=False)))
        assert data["passed"] is False
        assert data["quick"] is True
        assert data["results"][1]["verdict"] == "FAIL"
        assert "version" in data
