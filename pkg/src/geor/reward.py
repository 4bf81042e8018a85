"""Distance, format and composite rewards for coordinate predictions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .coords import ParseStatus, parse_strict
from .geodesy import GeoCoord, haversine_km

DISTANCE_CAP_KM = 20000.0


@dataclass(frozen=True)
class RewardBreakdown:
    distance_km: float | None
    r_distance: float | None
    r_format: int
    r_total: float
    parse_status: ParseStatus = ParseStatus.VALID

    def to_dict(self) -> dict:
        out = asdict(self)
        out["parse_status"] = self.parse_status.value
        return out


def distance_reward(d_km: float) -> float:
    """Piecewise-linear reward in [0, 1] that decays with the error distance.

    Knees at 750 km (0.5) and 2500 km (0.2); distances are capped at
    20000 km, where the reward reaches 0.
    """
    d = float(d_km)
    if not math.isfinite(d) or d < 0.0:
        raise ValueError(f"distance must be finite and non-negative, got {d_km!r}")
    d = min(d, DISTANCE_CAP_KM)
    if d <= 750.0:
        return 1.0 - 0.5 * d / 750.0
    if d <= 2500.0:
        return 0.5 - 0.3 * (d - 750.0) / 1750.0
    return 0.2 - 0.2 * (d - 2500.0) / 17500.0


def format_reward(text: str) -> int:
    return 1 if parse_strict(text).status is ParseStatus.VALID else 0


def composite_reward(prediction_text: str, truth: GeoCoord) -> RewardBreakdown:
    """Product of the distance and format rewards for one response.

    An invalid format short-circuits: no distance is computed and the
    total is 0.
    """
    if not isinstance(truth, GeoCoord):
        truth = GeoCoord(*truth)
    outcome = parse_strict(prediction_text)
    if not outcome.ok:
        return RewardBreakdown(None, None, 0, 0.0, outcome.status)
    d = haversine_km(outcome.coord, truth)
    r = distance_reward(d)
    return RewardBreakdown(d, r, 1, r, ParseStatus.VALID)
