"""
Terminal rendering of bound reports and tables.
"""

from typing import Any, Dict, List, Optional

from rich.panel import Panel
from rich.table import Table

from lowzero.bounds import BoundReport, PercentTable

NOT_APPLICABLE = "N/A"


def format_value(value: Optional[float]) -> str:
    """
    Format a bound the way the published tables print it.

    Args:
        value: Bound value, ``None`` when not applicable

    Returns:
        Six decimals for values in ``[1e-3, 1e3)``, scientific notation with
        six decimals outside that range, ``N/A`` for ``None``
    """
    if value is None:
        return NOT_APPLICABLE
    if 1e-3 <= abs(value) < 1e3:
        return f"{value:.6f}"
    return f"{value:.6e}"


def _input_lines(inputs: Dict[str, Any]) -> List[str]:
    return [f"{key}: {inputs[key]}" for key in sorted(inputs)]


def report_panel(report: BoundReport) -> Panel:
    """Panel with the value, inputs and diagnostics of one report."""
    ok = report.applicable and report.value is not None
    title = "omega_min" if report.kind == "omega_min" else "Percent bound"
    lines = [
        f"{'✅' if ok else '❌'} Value: [bold]{format_value(report.value)}[/bold]",
        "",
        *_input_lines(report.inputs),
        "",
        f"Provenance: {report.provenance}",
        f"Support: {report.support_flag}",
        f"Quadrature error: {report.quad_error:.2e}",
    ]
    if report.diagnostics:
        lines += ["", *report.diagnostics]
    return Panel.fit(
        "\n".join(lines), title=title, border_style="green" if ok else "red"
    )


def percent_table_view(table: PercentTable, title: Optional[str] = None) -> Table:
    """Rich table with one row per ``r`` and one column per level."""
    view = Table(title=title or f"Percent bounds, rho = {table.rho:g}")
    view.add_column("r", justify="right")
    for level in table.levels:
        view.add_column(f"n = {level}", justify="right")
    for r in table.r_values:
        view.add_row(
            str(r), *(format_value(table.value(level, r)) for level in table.levels)
        )
    return view


def checks_table(results: List[Any]) -> Table:
    """Rich table of self-test outcomes."""
    view = Table(title="Self-test")
    view.add_column("Check")
    view.add_column("Result")
    view.add_column("Detail")
    for result in results:
        status = "[green]pass[/green]" if result.passed else "[red]FAIL[/red]"
        view.add_row(result.name, status, result.detail)
    return view
