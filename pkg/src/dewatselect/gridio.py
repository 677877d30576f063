"""CSV grids: a header row of column labels, one labelled row per line.

The corner cell names the row dimension and is ignored on parse. Lines
starting with '#' are comments. Used for score matrices and any other
labelled numeric grid the command line accepts or emits.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .errors import SchemaError


def parse_grid(text: str) -> tuple[list[str], list[str], np.ndarray]:
    """Returns (row_labels, col_labels, values)."""
    header: list[str] | None = None
    row_labels: list[str] = []
    rows: list[list[float]] = []
    problems: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in next(csv.reader([raw]))]
        if header is None:
            if len(cells) < 2:
                raise SchemaError(f"line {lineno}: header needs at least one column label")
            header = cells[1:]
            continue
        if len(cells) != len(header) + 1:
            problems.append(
                f"line {lineno}: expected {len(header) + 1} cells, got {len(cells)}"
            )
            continue
        label, *values = cells
        if label in row_labels:
            problems.append(f"line {lineno}: duplicate row label {label!r}")
            continue
        try:
            parsed = [float(v) for v in values]
        except ValueError:
            bad = next(v for v in values if not _is_number(v))
            problems.append(f"line {lineno}: non-numeric cell {bad!r}")
            continue
        row_labels.append(label)
        rows.append(parsed)
    if header is None:
        raise SchemaError("empty document: missing header row")
    if problems:
        raise SchemaError("; ".join(problems))
    if not rows:
        raise SchemaError("grid has no data rows")
    return row_labels, header, np.asarray(rows)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def serialize_grid(row_labels, col_labels, values, corner: str = "label") -> str:
    values = np.asarray(values)
    if values.shape != (len(row_labels), len(col_labels)):
        raise SchemaError(
            f"values shape {values.shape} does not match "
            f"{len(row_labels)} rows x {len(col_labels)} columns"
        )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([corner, *col_labels])
    for label, row in zip(row_labels, values):
        writer.writerow([label, *(repr(float(v)) for v in row)])
    return buf.getvalue()
