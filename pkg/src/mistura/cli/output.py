"""
Formatting and file output for the mistura CLI.

Terminal numbers are printed at four significant figures; structured
outputs keep full precision.
"""

import csv
import io
import json
from pathlib import Path
from typing import Dict, List, Sequence

import typer

from mistura.core.models.mixability import MixabilityReport


def sig4(value) -> str:
    if value is None:
        return "—"
    return f"{value:.4g}"


def render_rows(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned plain-text table."""
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(str(cell))) for w, cell in zip(widths, row)]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


def table_grid(
    rows: Sequence[str], columns: Sequence[str], reports: Dict[tuple, MixabilityReport]
) -> List[List[str]]:
    """Table cells ``regret (eta*)`` with the row name first."""
    return [[row] + [reports[(row, column)].cell for column in columns] for row in rows]


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_json(path: Path, document) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2))
    return path


def emit_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    typer.echo(buffer.getvalue(), nl=False)


def emit_json(document) -> None:
    typer.echo(json.dumps(document, indent=2))
