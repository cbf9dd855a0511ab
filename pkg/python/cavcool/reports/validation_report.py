"""
Validation report rendering

Renders the acceptance-suite verdicts as a plain-text table for the
terminal, as Markdown for documentation, and as JSON for machines.
"""

from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from cavcool import __version__
from cavcool.records import to_json
from cavcool.validation import ValidationReport

TEMPLATE_DIR = Path(__file__).parent.parent / "templates"

jinja_env = Environment(
    loader=FileSystemLoader(TEMPLATE_DIR),
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def _render(template_name: str, report: ValidationReport) -> str:
    template = jinja_env.get_template(template_name)
    return template.render(
        report=report,
        results=report.results,
        version=__version__,
        passed_count=len(report.results) - len(report.failures),
    )


def render_text(report: ValidationReport) -> str:
    """Fixed-width table of criterion, target, measured, tolerance, verdict"""
    return _render("validation_report.txt.j2", report)


def render_markdown(report: ValidationReport) -> str:
    return _render("validation_report.md.j2", report)


def render_json(report: ValidationReport) -> str:
    """Machine-readable verdicts"""
    data = report.as_dict()
    data["version"] = __version__
    return to_json(data)
