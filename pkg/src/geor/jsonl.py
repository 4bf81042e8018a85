"""JSONL reading/writing shared by the pipeline stages."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator


@dataclass(frozen=True)
class BadLine:
    """Marker for an input line that is not a JSON object."""

    lineno: int
    reason: str


def iter_jsonl(source) -> Iterator[dict | BadLine]:
    """Yield one dict per non-blank line, or a :class:`BadLine` for junk."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from iter_jsonl(fh)
        return
    for lineno, line in enumerate(source, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield BadLine(lineno, f"line {lineno}: invalid JSON ({exc.msg})")
            continue
        if not isinstance(obj, dict):
            yield BadLine(lineno, f"line {lineno}: expected a JSON object")
            continue
        yield obj


def write_jsonl(rows: Iterable[dict], dest=None) -> int:
    """Write rows to a path or stream (stdout by default); returns the count."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            return write_jsonl(rows, fh)
    fh: IO[str] = dest if dest is not None else sys.stdout
    n = 0
    for row in rows:
        fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        n += 1
    return n
