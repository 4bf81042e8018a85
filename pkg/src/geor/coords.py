"""Strict extraction of a single ``(lat, lon)`` pair from model output.

Grammar, ASCII only::

    "(" ws* decimal ws* "," ws* decimal ws* ")"
    decimal := [+-]? digit+ ("." digit+)?

Scientific notation, degree signs and hemisphere letters never match.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

from .geodesy import GeoCoord

_DECIMAL = r"[+-]?[0-9]+(?:\.[0-9]+)?"
_WS = r"[ \t\r\n\f\v]*"
PAIR_RE = re.compile(
    rf"\({_WS}(?P<lat>{_DECIMAL}){_WS},{_WS}(?P<lon>{_DECIMAL}){_WS}\)",
    re.ASCII,
)
# Parenthesised text holding digits on both sides of a comma: an attempted
# pair that the strict grammar refused, e.g. "(48.8N, 2.3E)" or "(1e3, 2)".
_PAREN_RE = re.compile(r"\(([^()]*)\)")
_DIGIT_RE = re.compile(r"[0-9]", re.ASCII)


class ParseStatus(str, enum.Enum):
    VALID = "valid"
    NO_PAIR_FOUND = "no_pair_found"
    MULTIPLE_PAIRS = "multiple_pairs"
    OUT_OF_RANGE = "out_of_range"
    MALFORMED = "malformed"


@dataclass(frozen=True)
class Candidate:
    lat: float
    lon: float
    span: tuple[int, int]


@dataclass(frozen=True)
class ParsedCoordinate:
    coord: GeoCoord
    source_span: tuple[int, int]


@dataclass(frozen=True)
class ParseOutcome:
    status: ParseStatus
    parsed: ParsedCoordinate | None
    candidate_count: int

    @property
    def ok(self) -> bool:
        return self.status is ParseStatus.VALID

    @property
    def coord(self) -> GeoCoord | None:
        return self.parsed.coord if self.parsed is not None else None

    def to_dict(self) -> dict:
        out = {"status": self.status.value, "candidate_count": self.candidate_count}
        if self.parsed is not None:
            out["lat"] = self.parsed.coord.lat_deg
            out["lon"] = self.parsed.coord.lon_deg
            out["span"] = list(self.parsed.source_span)
        return out


def extract_candidates(text: str) -> list[Candidate]:
    """Every non-overlapping grammar match, scanned left to right."""
    return [
        Candidate(float(m.group("lat")), float(m.group("lon")), m.span())
        for m in PAIR_RE.finditer(text)
    ]


def parse_strict(text: str) -> ParseOutcome:
    """Classify ``text`` by how many well-formed pairs it holds.

    Only exactly one in-range pair yields :attr:`ParseStatus.VALID`. Zero
    strict candidates give ``malformed`` when a parenthesised near-miss is
    present and ``no_pair_found`` otherwise.
    """
    if not isinstance(text, str):
        return ParseOutcome(ParseStatus.MALFORMED, None, 0)
    candidates = extract_candidates(text)
    n = len(candidates)
    if n > 1:
        return ParseOutcome(ParseStatus.MULTIPLE_PAIRS, None, n)
    if n == 0:
        if _has_near_miss(text):
            return ParseOutcome(ParseStatus.MALFORMED, None, 0)
        return ParseOutcome(ParseStatus.NO_PAIR_FOUND, None, 0)
    cand = candidates[0]
    # huge digit strings overflow to inf, which the range test also rejects
    if not (math.isfinite(cand.lat) and math.isfinite(cand.lon)):
        return ParseOutcome(ParseStatus.OUT_OF_RANGE, None, 1)
    if not (-90.0 <= cand.lat <= 90.0 and -180.0 <= cand.lon <= 180.0):
        return ParseOutcome(ParseStatus.OUT_OF_RANGE, None, 1)
    return ParseOutcome(
        ParseStatus.VALID,
        ParsedCoordinate(GeoCoord(cand.lat, cand.lon), cand.span),
        1,
    )


def _has_near_miss(text: str) -> bool:
    for m in _PAREN_RE.finditer(text):
        head, sep, tail = m.group(1).partition(",")
        if sep and _DIGIT_RE.search(head) and _DIGIT_RE.search(tail):
            return True
    return False


def render_pair(coord: GeoCoord, decimals: int = 4) -> str:
    """Canonical ``(lat, lon)`` text that :func:`parse_strict` accepts."""
    return f"({coord.lat_deg:.{decimals}f}, {coord.lon_deg:.{decimals}f})"
