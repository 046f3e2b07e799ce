"""Flat-file input and output: one-column CSV samples and report emission."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError


def fmt_real(v) -> str:
    """17 significant digits; round-trips every double exactly."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def ingest_csv(path, column: int = 0) -> np.ndarray:
    """Read one numeric value per row from ``path``.

    A first row that does not parse as a number is taken as a header.  Blank
    lines are skipped.  Extra columns are allowed and ignored unless
    ``column`` selects one of them.

    Raises
    ------
    ConfigError
        Missing file, malformed row (with its line number) or non-finite value.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read data file {str(path)!r}: {exc.strerror}") from None
    values = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if column >= len(row):
            raise ConfigError(f"{path}:{lineno}: expected at least {column + 1} column(s)")
        cell = row[column].strip()
        try:
            v = float(cell)
        except ValueError:
            if lineno == 1:
                continue  # header
            raise ConfigError(f"{path}:{lineno}: not a number: {cell!r}") from None
        if not math.isfinite(v):
            raise ConfigError(f"{path}:{lineno}: non-finite value {cell!r}")
        values.append(v)
    if not values:
        raise ConfigError(f"{path}: no numeric rows")
    return np.array(values, dtype=float)


def write_csv(rows: list[dict], path, columns: list[str] | None = None) -> None:
    """Write dict rows with a header, ``','`` separators and LF line endings."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_real(r.get(c)) for c in columns])
    Path(path).write_text(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def emit_report(report, path, format: str = "json", include_timing: bool = False) -> None:
    """Write a report as JSON (full) or CSV (one row per entry).

    ``report`` is anything with ``to_dict()`` and ``rows()``.  Wall-clock time
    is left out unless ``include_timing`` so identical runs give identical
    files.  JSON floats use Python's shortest round-trip representation,
    which reproduces each double exactly; CSV reals use 17 significant digits.
    """
    if format == "json":
        doc = _jsonable(report.to_dict(include_timing=include_timing))
        Path(path).write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n")
    elif format == "csv":
        rows = report.rows()
        write_csv(rows, path, report.columns if hasattr(report, "columns") else None)
    else:
        raise ConfigError(f"unknown report format {format!r}; expected json or csv")
