"""
Machine-readable output: CSV tables, JSON reports and plot-data files.

CSV is comma separated with ``\\n`` line endings; JSON uses sorted keys and
two-space indentation so equal inputs always give byte-identical files.
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Union

from lowzero.bounds import BoundReport, PercentTable
from lowzero.formatters.text import format_value
from lowzero.utils.file_utils import ensure_directory, write_file
from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)


def _finite(value: Any) -> Any:
    # JSON has no infinities or NaN.
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


def to_json(data: Any) -> str:
    """Stable JSON text with a trailing newline."""
    return json.dumps(_finite(data), sort_keys=True, indent=2) + "\n"


def _csv_text(rows: List[List[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def table_csv(table: PercentTable) -> str:
    """
    CSV with header ``r,level2,level4,...`` and ``N/A`` for cells that do not apply.
    """
    rows = [["r"] + [f"level{level}" for level in table.levels]]
    for r in table.r_values:
        cells = [format_value(table.value(level, r)) for level in table.levels]
        rows.append([str(r)] + cells)
    return _csv_text(rows)


def reports_json(reports: List[BoundReport]) -> str:
    """A single report as an object, several as a list."""
    payload: Union[Dict[str, Any], List[Dict[str, Any]]]
    if len(reports) == 1:
        payload = reports[0].to_dict()
    else:
        payload = [report.to_dict() for report in reports]
    return to_json(payload)


def table_payload(table: PercentTable) -> Dict[str, Any]:
    """JSON-ready mapping with every report of the table, keyed by level."""
    return {
        "rho": table.rho,
        "levels": table.levels,
        "r_values": table.r_values,
        "cells": {
            str(level): [report.to_dict() for report in table.cells[level]]
            for level in table.levels
        },
    }


def figure_data(table: PercentTable, level: int) -> str:
    """Two-column ``r,percent`` data for one level (applicable points only)."""
    rows = [["r", "percent"]]
    rows += [[str(r), repr(float(value))] for r, value in table.curve(level)]
    return _csv_text(rows)


def write_figure_data(table: PercentTable, directory: Union[str, Path]) -> List[Path]:
    """
    Write one ``level<n>_rho<rho>.csv`` plot-data file per level.

    Returns:
        Paths written, in level order
    """
    directory = ensure_directory(directory)
    written = []
    for level in table.levels:
        path = directory / f"level{level}_rho{table.rho:g}.csv"
        write_file(path, figure_data(table, level))
        logger.info(f"Wrote plot data for level {level} to {path}")
        written.append(path)
    return written
