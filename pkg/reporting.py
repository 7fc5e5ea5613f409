"""
Report Formatting

Deterministic text output for the command-line tools. Identical inputs give
byte-identical files:
1. format_float - 17 significant digits, "inf"/"-inf"/"nan" as strings
2. to_json_text - sorted keys, two-space indent, LF, trailing newline
3. write_csv - csv rows with LF line endings
4. write_output - text to a file or stdout
"""

import csv
import io
import json
import math
import sys
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np


def format_float(x: float) -> str:
    """Float text with 17 significant digits."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _emit(obj: Any, level: int) -> str:
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(obj[k], level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        values = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not len(values):
            return "[]"
        return "[\n" + ",\n".join(pad + _emit(v, level + 1) for v in values) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return json.dumps(format_float(value))
        return format_float(value)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def to_json_text(obj: Any) -> str:
    """
    Serialize a report.

    Keys are sorted and floats are written with 17 significant digits;
    non-finite values become the strings "inf", "-inf" and "nan".
    """
    return _emit(obj, 0) + "\n"


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if value is None:
        return ""
    return str(value)


def csv_text(rows: Iterable[Sequence[Any]], columns: List[str]) -> str:
    """CSV document with a header row; floats use format_float."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(rows: Iterable[Sequence[Any]], columns: List[str], target: Optional[str] = None):
    write_output(csv_text(rows, columns), target)


def write_output(text: str, path: Optional[str] = None):
    """Write text to path, or to stdout when path is None or "-"."""
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def aligned_table(rows: List[dict], columns: List[str]) -> str:
    """Plain-text table with left-aligned columns."""
    cells = [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
