"""Point-cloud files: CSV with one ``x,y`` pair per line, or a JSON array of pairs."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class PointFormatError(ValueError):
    """Malformed point input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _finite(x: float, line: int | None) -> float:
    if not math.isfinite(x):
        raise PointFormatError(f"non-finite coordinate {x!r}", line)
    return x


def parse_csv(text: str) -> np.ndarray:
    """Rows ``x,y``; blank lines and lines starting with ``#`` are skipped.

    A non-numeric first row is accepted as a header.
    """
    rows = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        fields = [f.strip() for f in s.split(",")]
        if len(fields) != 2:
            raise PointFormatError(f"expected 2 fields, got {len(fields)}: {raw!r}", no)
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError:
            if not rows and all(f and not _numeric(f) for f in fields):
                continue  # header
            raise PointFormatError(f"not a number pair: {raw!r}", no) from None
        rows.append((_finite(x, no), _finite(y, no)))
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


def _numeric(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def parse_json(text: str) -> np.ndarray:
    """A JSON array of ``[x, y]`` pairs, or a scene object with a ``points`` key."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PointFormatError(exc.msg, exc.lineno) from None
    nested = isinstance(data, dict) and "points" in data
    if nested:
        data = data["points"]
    if not isinstance(data, list):
        raise PointFormatError("expected a JSON array of [x, y] pairs")
    rows = []
    for k, item in enumerate(data):
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in item)):
            line = None if nested else _json_line(text, k)
            raise PointFormatError(f"entry {k} is not an [x, y] number pair: {item!r}", line)
        rows.append((_finite(float(item[0]), None), _finite(float(item[1]), None)))
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


def _json_line(text: str, k: int) -> int | None:
    """1-based line on which the k-th element of the top-level array starts."""
    depth, line, count, in_str, esc, expect = 0, 1, -1, False, False, False
    for ch in text:
        if ch == "\n":
            line += 1
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
            continue
        if depth == 1 and expect and not ch.isspace() and ch not in ",]":
            count += 1
            expect = False
            if count == k:
                return line
        if ch == '"':
            in_str = True
        elif ch in "[{":
            depth += 1
            if depth == 1:
                expect = True
        elif ch in "]}":
            depth -= 1
        elif ch == "," and depth == 1:
            expect = True
    return None


def read_points(path: str | Path) -> np.ndarray:
    """Load points by extension (``.json`` is JSON, anything else CSV)."""
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise PointFormatError(f"cannot read {path}: {exc}") from None
    pts = parse_json(text) if path.suffix.lower() == ".json" else parse_csv(text)
    if pts.shape[0] == 0:
        raise PointFormatError(f"{path} contains no points")
    return pts


def points_csv(points) -> str:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return "".join(f"{format(x, '.9g')},{format(y, '.9g')}\n" for x, y in pts)


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a sibling temp file so readers never see partial output."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)
