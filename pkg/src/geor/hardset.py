"""Hard-subset selection: drop samples near dense clusters of easy hits.

Popular regions are found by fixed-grid density binning over samples a
baseline already localizes correctly. Every sample within ``radius_km``
of a popular centre is then excluded.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .geodesy import EARTH_RADIUS_KM, GeoCoord, haversine_km, wrap_lon

DEFAULT_RADIUS_KM = 200.0
DEFAULT_CELL_DEG = 1.0
DEFAULT_MIN_COUNT = 20
DEFAULT_CORRECT_THRESHOLD_KM = 25.0

KM_PER_DEG = EARTH_RADIUS_KM * math.pi / 180.0


def cell_key(lat: float, lon: float, cell_deg: float) -> tuple[int, int]:
    return math.floor(lat / cell_deg), math.floor(wrap_lon(lon) / cell_deg)


class SpatialGridIndex:
    """Bucket points by (lat, lon) grid cell for radius queries."""

    def __init__(self, coords: Sequence[GeoCoord], cell_deg: float = DEFAULT_CELL_DEG):
        if cell_deg <= 0:
            raise ValueError("cell_deg must be positive")
        self.cell_deg = float(cell_deg)
        self.coords = list(coords)
        self.cells: dict[tuple[int, int], list[int]] = defaultdict(list)
        for i, c in enumerate(self.coords):
            self.cells[cell_key(c.lat_deg, c.lon_deg, self.cell_deg)].append(i)

    def _lon_keys(self, lon: float, half_width: float) -> set[int]:
        cd = self.cell_deg
        if half_width >= 180.0:
            return set(range(math.floor(-180.0 / cd), math.floor(179.999999999 / cd) + 1))
        lo, hi = lon - half_width, lon + half_width
        spans = []
        if lo < -180.0:
            spans += [(lo + 360.0, 180.0), (-180.0, hi)]
        elif hi >= 180.0:
            spans += [(lo, 180.0), (-180.0, hi - 360.0)]
        else:
            spans.append((lo, hi))
        keys: set[int] = set()
        for a, b in spans:
            b = min(b, math.nextafter(180.0, 0.0))
            keys.update(range(math.floor(a / cd), math.floor(b / cd) + 1))
        return keys

    def candidate_indices(self, center: GeoCoord, radius_km: float) -> list[int]:
        """Indices in every cell that could hold a point within ``radius_km``.

        The longitude window is sized for the most poleward latitude the
        radius reaches, so the neighbourhood stays sound at high latitudes.
        """
        dlat = radius_km / KM_PER_DEG
        lat_lo, lat_hi = center.lat_deg - dlat, center.lat_deg + dlat
        lat_edge = min(90.0, max(abs(lat_lo), abs(lat_hi)))
        cos_edge = math.cos(math.radians(lat_edge))
        half_angle = min(radius_km / EARTH_RADIUS_KM, math.pi) / 2.0
        if lat_edge >= 90.0 or cos_edge <= 0.0 or math.sin(half_angle) >= cos_edge:
            half_width = 180.0
        else:
            half_width = math.degrees(2.0 * math.asin(math.sin(half_angle) / cos_edge))
            half_width = half_width * (1.0 + 1e-9) + 1e-9  # rounding slack
        cd = self.cell_deg
        lat_keys = range(math.floor(max(lat_lo, -90.0) / cd), math.floor(min(lat_hi, 90.0) / cd) + 1)
        lon_keys = self._lon_keys(wrap_lon(center.lon_deg), half_width)
        out = []
        for i in lat_keys:
            for j in lon_keys:
                out.extend(self.cells.get((i, j), ()))
        return out

    def query_radius(self, center: GeoCoord, radius_km: float) -> list[int]:
        """Sorted indices of points with distance <= ``radius_km``."""
        return sorted(
            i for i in self.candidate_indices(center, radius_km)
            if haversine_km(center, self.coords[i]) <= radius_km
        )


@dataclass(frozen=True)
class PopularRegion:
    center: GeoCoord
    member_count: int


def cluster_popular_regions(
    correct_samples: Sequence[GeoCoord],
    cell_deg: float = DEFAULT_CELL_DEG,
    min_count: int = DEFAULT_MIN_COUNT,
) -> list[PopularRegion]:
    """One popular region per grid cell holding at least ``min_count`` samples.

    Centres are the member mean. Output is sorted by descending count, then
    by (lat, lon).
    """
    if cell_deg <= 0:
        raise ValueError("cell_deg must be positive")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    index = SpatialGridIndex(correct_samples, cell_deg)
    regions = []
    for members in index.cells.values():
        if len(members) < min_count:
            continue
        lats = np.array([index.coords[i].lat_deg for i in members])
        lons = np.array([wrap_lon(index.coords[i].lon_deg) for i in members])
        # members share a cell, so wrapped longitudes are already contiguous
        center = GeoCoord(float(lats.mean()), float(lons.mean()))
        regions.append(PopularRegion(center, len(members)))
    regions.sort(key=lambda r: (-r.member_count, r.center.lat_deg, r.center.lon_deg))
    return regions


def nearest_popular_km(p: GeoCoord, popular: Sequence[PopularRegion]) -> float:
    """Distance to the closest popular centre, ``inf`` when there are none."""
    return min((haversine_km(p, r.center) for r in popular), default=math.inf)


def _nearest(p: GeoCoord, popular: Sequence[PopularRegion]) -> tuple[PopularRegion | None, float]:
    best, best_d = None, math.inf
    for r in popular:
        d = haversine_km(p, r.center)
        if d < best_d:
            best, best_d = r, d
    return best, best_d


@dataclass(frozen=True)
class Exclusion:
    index: int
    record: Any
    nearest_center: GeoCoord
    distance_km: float


@dataclass
class HardFilterResult:
    retained: list
    excluded: list[Exclusion]

    @property
    def excluded_count(self) -> int:
        return len(self.excluded)


def filter_hard(
    samples: Sequence[tuple[Any, GeoCoord]],
    popular: Sequence[PopularRegion],
    radius_km: float = DEFAULT_RADIUS_KM,
    cell_deg: float = DEFAULT_CELL_DEG,
) -> HardFilterResult:
    """Keep samples farther than ``radius_km`` from every popular centre.

    ``samples`` is a sequence of ``(record, coord)`` pairs; retained pairs
    keep their input order. A sample exactly at ``radius_km`` is excluded.
    """
    if not radius_km > 0:
        raise ValueError("radius_km must be positive")
    samples = list(samples)
    index = SpatialGridIndex([c for _, c in samples], cell_deg)
    near: set[int] = set()
    for region in popular:
        near.update(index.query_radius(region.center, radius_km))
    retained, excluded = [], []
    for i, (rec, coord) in enumerate(samples):
        if i in near:
            center, d = _nearest(coord, popular)
            excluded.append(Exclusion(i, rec, center.center, d))
        else:
            retained.append((rec, coord))
    return HardFilterResult(retained, excluded)


def select_correct(
    predictions: Sequence[GeoCoord | None],
    truths: Sequence[GeoCoord],
    threshold_km: float = DEFAULT_CORRECT_THRESHOLD_KM,
) -> list[GeoCoord]:
    """Truth coordinates of samples whose prediction lands within ``threshold_km``."""
    return [
        t for p, t in zip(predictions, truths)
        if p is not None and haversine_km(p, t) <= threshold_km
    ]
