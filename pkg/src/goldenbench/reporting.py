"""Rendering of result rows as aligned tables, CSV, or JSON records.

All three renderers are deterministic: fixed float formatting upstream,
sorted JSON keys, and "\n" line endings, so identical inputs produce
byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any


def render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def render_csv(headers: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue()


def render_records(records: list[dict[str, Any]]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def fmt(value: float, decimals: int) -> str:
    return f"{value:.{decimals}f}"
