"""Threshold-accuracy evaluation and report tables."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

from .coords import ParseStatus, parse_strict
from .geodesy import GeoCoord, haversine_km

THRESHOLDS_KM = (1.0, 25.0, 200.0, 750.0, 2500.0)
COLUMNS = tuple(f"{t:g}km" for t in THRESHOLDS_KM)


@dataclass(frozen=True)
class PredictionRecord:
    """One prediction, given either as raw model text or as a coordinate."""

    id: str
    truth: GeoCoord
    predicted_text: str | None = None
    predicted: GeoCoord | None = None

    @classmethod
    def from_dict(cls, row: dict) -> "PredictionRecord":
        truth = GeoCoord(row["truth_lat"], row["truth_lon"])
        predicted = None
        if row.get("pred_lat") is not None and row.get("pred_lon") is not None:
            predicted = GeoCoord(row["pred_lat"], row["pred_lon"])
        return cls(str(row["id"]), truth, row.get("predicted_text"), predicted)


@dataclass(frozen=True)
class ScoredPrediction:
    id: str
    status: ParseStatus | str  # plain str for non-parse failures, e.g. "request_failed"
    distance_km: float | None
    hits: tuple[bool, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": getattr(self.status, "value", self.status),
            "distance_km": self.distance_km,
            "hits": dict(zip(COLUMNS, self.hits)),
        }


def score_prediction(rec: PredictionRecord, thresholds=THRESHOLDS_KM) -> ScoredPrediction:
    if rec.predicted is not None:
        coord, status = rec.predicted, ParseStatus.VALID
    else:
        outcome = parse_strict(rec.predicted_text or "")
        coord, status = outcome.coord, outcome.status
    if coord is None:
        return ScoredPrediction(rec.id, status, None, tuple(False for _ in thresholds))
    d = haversine_km(coord, rec.truth)
    return ScoredPrediction(rec.id, status, d, tuple(d <= t for t in thresholds))


@dataclass(frozen=True)
class EvalReport:
    fractions: tuple[float, ...]
    n_total: int
    n_unparsable: int
    thresholds_km: tuple[float, ...] = field(default=THRESHOLDS_KM)

    def to_dict(self) -> dict:
        return {
            "thresholds_km": list(self.thresholds_km),
            "fractions": list(self.fractions),
            "n_total": self.n_total,
            "n_unparsable": self.n_unparsable,
        }


def report_from_scores(scores: Sequence[ScoredPrediction], thresholds=THRESHOLDS_KM) -> EvalReport:
    n = len(scores)
    if n == 0:
        raise ValueError("cannot evaluate an empty prediction set")
    counts = [sum(s.hits[k] for s in scores) for k in range(len(thresholds))]
    unparsable = sum(s.distance_km is None for s in scores)
    return EvalReport(tuple(c / n for c in counts), n, unparsable, tuple(thresholds))


def threshold_accuracy(records: Sequence[PredictionRecord]) -> EvalReport:
    """Fraction of records whose error is within each threshold (inclusive).

    Unparsable predictions stay in the denominator and miss every threshold.
    """
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise ValueError("prediction ids must be unique")
    return report_from_scores([score_prediction(r) for r in records])


def format_row(report: EvalReport) -> str:
    return " ".join(f"{100.0 * f:.2f}" for f in report.fractions)


def render_markdown(rows: Sequence[tuple[str, EvalReport]]) -> str:
    """Markdown table with one row per labelled report, percentages at 2 dp."""
    lines = [
        "| Method | " + " | ".join(COLUMNS) + " |",
        "|---|" + "---|" * len(COLUMNS),
    ]
    for label, rep in rows:
        cells = [f"{100.0 * f:.2f}" for f in rep.fractions]
        lines.append(f"| {label} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_csv(rows: Sequence[tuple[str, EvalReport]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", *COLUMNS])
    for label, rep in rows:
        w.writerow([label, *(f"{100.0 * f:.2f}" for f in rep.fractions)])
    return buf.getvalue()


def render_report(report: EvalReport, label: str) -> tuple[str, str]:
    """(markdown, csv) tables for a single labelled run."""
    return render_markdown([(label, report)]), render_csv([(label, report)])
