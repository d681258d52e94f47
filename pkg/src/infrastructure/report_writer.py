"""Rendering BenchReport as an aligned text table, CSV and JSON."""

import csv
import io
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional, Union

from src.application.bench_service import BenchReport, BenchRow

logger = logging.getLogger(__name__)

COLUMNS = ("engine", "n", "answers_count", "facts_derived", "sld_nodes", "wall_time_ms")


def _cell(value: Optional[Union[str, int, float]]) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _records(report: BenchReport) -> List[Dict[str, object]]:
    return [asdict(row) for row in report.rows]


def render_table(report: BenchReport) -> str:
    cells = [list(COLUMNS)]
    cells.extend([_cell(record[column]) or "-" for column in COLUMNS] for record in _records(report))
    widths = [max(len(row[i]) for row in cells) for i in range(len(COLUMNS))]
    lines = []
    for index, row in enumerate(cells):
        padded = [row[0].ljust(widths[0])] + [cell.rjust(width) for cell, width in zip(row[1:], widths[1:])]
        lines.append("  ".join(padded).rstrip())
        if index == 0:
            lines.append("  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


def render_csv(report: BenchReport) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for record in _records(report):
        writer.writerow({column: _cell(record[column]) for column in COLUMNS})
    return buffer.getvalue()


def render_json(report: BenchReport) -> str:
    return json.dumps(_records(report), indent=2) + "\n"


RENDERERS = {"table": render_table, "csv": render_csv, "json": render_json}


def write_report(report: BenchReport, path: Union[str, Path], fmt: str) -> None:
    Path(path).write_text(RENDERERS[fmt](report), encoding="utf-8")
    logger.info(f"Wrote {len(report.rows)} bench rows to {path}")


def parse_row(record: Dict[str, str]) -> BenchRow:
    """Inverse of one CSV record; empty cells become None."""

    def optional_int(cell: str) -> Optional[int]:
        return int(cell) if cell else None

    return BenchRow(
        engine=record["engine"],
        n=int(record["n"]),
        answers_count=int(record["answers_count"]),
        facts_derived=optional_int(record["facts_derived"]),
        sld_nodes=optional_int(record["sld_nodes"]),
        wall_time_ms=float(record["wall_time_ms"]),
    )
