"""Comma-separated tables with a schema header and a '#' metadata line.

Line 1 names the columns, line 2 is ``# key=value ...`` metadata, further
'#' lines are ignored. Floats are written with 17 significant digits so a
save/load cycle returns the same binary value.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

from hulthen_fss import __version__
from hulthen_fss.errors import SurfaceParseError


def fmt_float(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def config_hash(obj) -> str:
    """Short stable digest of a JSON-serializable config description."""
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_table(path, columns, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    info = {"version": __version__}
    info.update(meta or {})
    lines = [",".join(columns), "# " + " ".join(f"{k}={v}" for k, v in info.items())]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(columns)}")
        lines.append(",".join(fmt_float(v) if isinstance(v, float) else ("" if v is None else str(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def parse_meta(line: str) -> dict:
    out = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


def read_table(path, columns):
    """Return ([(line_number, {column: text}), ...], metadata) for a table file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SurfaceParseError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise SurfaceParseError(f"{path}: empty file, expected a header", line=1)
    header = [c.strip() for c in lines[0].split(",")]
    if header != list(columns):
        raise SurfaceParseError(f"{path}: header {header} does not match {list(columns)}", line=1)
    meta = {}
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            if i == 2:
                meta = parse_meta(line)
            continue
        fields = line.split(",")
        if len(fields) != len(columns):
            raise SurfaceParseError(f"{path}:{i}: expected {len(columns)} fields, got {len(fields)}", line=i)
        rows.append((i, dict(zip(columns, (f.strip() for f in fields)))))
    return rows, meta


def parse_float(text: str, line: int, column: str, allow_empty: bool = False):
    if text == "":
        if allow_empty:
            return None
        raise SurfaceParseError(f"line {line}: empty value in column {column!r}", line=line, column=column)
    try:
        v = float(text)
    except ValueError:
        raise SurfaceParseError(f"line {line}: cannot parse {text!r} in column {column!r}", line=line, column=column) from None
    if not math.isfinite(v):
        raise SurfaceParseError(f"line {line}: non-finite value {text!r} in column {column!r}", line=line, column=column)
    return v


def parse_int(text: str, line: int, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SurfaceParseError(f"line {line}: cannot parse {text!r} in column {column!r}", line=line, column=column) from None
