"""CSV and JSON-lines writers for sweep rows and per-segment traces.

Floats are written with ``repr`` so they round-trip exactly; ``None`` becomes
an empty CSV cell (``null`` in JSON lines) and booleans are ``true``/``false``.
Nothing time-dependent is written, so identical inputs give identical files.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

from cavity_ghz.config import OUTPUT_FORMATS

logger = logging.getLogger(__name__)


def format_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Iterable[Mapping[str, object]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(col)) for col in columns])
    return buffer.getvalue()


def _json_value(value: object) -> object:
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, float) and value in (float("inf"), float("-inf")):
        return repr(value)
    return value


def rows_to_jsonl(rows: Iterable[Mapping[str, object]], columns: Sequence[str]) -> str:
    lines = [json.dumps({col: _json_value(row.get(col)) for col in columns}) for row in rows]
    return "".join(line + "\n" for line in lines)


def write_rows(
    rows: Iterable[Mapping[str, object]],
    columns: Sequence[str],
    path: Path,
    output_format: str = "csv",
) -> Path:
    """Write *rows* (dicts keyed by *columns*) to *path* in the chosen format."""
    if output_format not in OUTPUT_FORMATS:
        raise ValueError(f"Unrecognized output format '{output_format}'")
    rows = list(rows)
    text = rows_to_csv(rows, columns) if output_format == "csv" else rows_to_jsonl(rows, columns)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    logger.info("Wrote %d row(s) to %s", len(rows), path)
    return path
