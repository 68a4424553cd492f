"""CSV and JSON report files with a reproducibility header.

CSV: ``#``-prefixed header lines (tool, version, command, resolved config,
optional summary), then a column row and data rows; floats carry 17
significant digits.  JSON: one object ``{"header": {...}, "records": [...]}``
where each record has ``schema_version``.  No timestamps are written, so
re-running the recorded command reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile

from . import __version__

SCHEMA_VERSION = 1
TOOL = "heatkernels"


def fmt_float(v: float) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _jsonable(v):
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return v if math.isfinite(v) else fmt_float(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return str(v)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, int, float)):
        return fmt_float(v)
    if isinstance(v, str):
        return v
    return json.dumps(_jsonable(v), sort_keys=True, separators=(",", ":"))


def header(command: list, config: dict, summary: dict | None = None) -> dict:
    out = {"tool": TOOL, "version": __version__, "command": list(command), "config": config}
    if summary is not None:
        out["summary"] = summary
    return out


def render_csv(head: dict, columns: list, records: list) -> str:
    buf = io.StringIO()
    for key in ("tool", "version", "command", "config", "summary"):
        if key in head:
            val = head[key] if isinstance(head[key], str) else json.dumps(_jsonable(head[key]), sort_keys=True)
            buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_cell(rec.get(c)) for c in columns])
    return buf.getvalue()


def render_json(head: dict, records: list) -> str:
    recs = [{"schema_version": SCHEMA_VERSION, **r} for r in records]
    return json.dumps({"header": _jsonable(head), "records": _jsonable(recs)},
                      indent=2, sort_keys=True) + "\n"


def emit(text: str, out_path: str | None) -> None:
    """Write the whole report at once; files are replaced atomically."""
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
