"""Spherical great-circle distance and validated coordinates.

All public functions take decimal degrees; radians are an internal detail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_KM = 6371.0
MAX_DISTANCE_KM = math.pi * EARTH_RADIUS_KM


class CoordinateError(ValueError):
    """Base class for rejected coordinates."""


class LatitudeRangeError(CoordinateError):
    pass


class LongitudeRangeError(CoordinateError):
    pass


class NonFiniteCoordinateError(CoordinateError):
    pass


@dataclass(frozen=True)
class GeoCoord:
    """A latitude/longitude pair in decimal degrees.

    Construction validates the range; values are never clamped.
    """

    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        lat, lon = self.lat_deg, self.lon_deg
        try:
            lat, lon = float(lat), float(lon)
        except (TypeError, ValueError) as exc:
            raise NonFiniteCoordinateError(f"not a number: {self.lat_deg!r}, {self.lon_deg!r}") from exc
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise NonFiniteCoordinateError(f"non-finite coordinate ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise LatitudeRangeError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise LongitudeRangeError(f"longitude {lon} outside [-180, 180]")
        object.__setattr__(self, "lat_deg", lat)
        object.__setattr__(self, "lon_deg", lon)

    def __iter__(self):
        yield self.lat_deg
        yield self.lon_deg

    def __str__(self):
        return f"({self.lat_deg}, {self.lon_deg})"


def make_coord(lat_deg, lon_deg) -> GeoCoord:
    """Build a :class:`GeoCoord`, raising a :class:`CoordinateError` subclass on bad input."""
    return GeoCoord(lat_deg, lon_deg)


def haversine_km(a: GeoCoord, b: GeoCoord) -> float:
    """Great-circle distance in kilometres on a sphere of radius 6371 km."""
    lat1 = math.radians(a.lat_deg)
    lat2 = math.radians(b.lat_deg)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon_deg) - math.radians(a.lon_deg)
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    # rounding can push h fractionally outside [0, 1] near antipodes
    h = min(max(h, 0.0), 1.0)
    return EARTH_RADIUS_KM * 2.0 * math.asin(math.sqrt(h))


def haversine_km_array(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Vectorised :func:`haversine_km` over broadcastable degree arrays (no validation)."""
    lat1 = np.radians(np.asarray(lat1, dtype=float))
    lat2 = np.radians(np.asarray(lat2, dtype=float))
    dlat = lat2 - lat1
    dlon = np.radians(np.asarray(lon2, dtype=float)) - np.radians(np.asarray(lon1, dtype=float))
    h = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    return EARTH_RADIUS_KM * 2.0 * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def wrap_lon(lon_deg: float) -> float:
    """Wrap a longitude into [-180, 180)."""
    return (lon_deg + 180.0) % 360.0 - 180.0


def destination(origin: GeoCoord, bearing_deg: float, distance_km: float) -> GeoCoord:
    """Point reached by travelling ``distance_km`` along a great circle from ``origin``.

    Used to plant samples at known distances in fixtures and demos.
    """
    phi1 = math.radians(origin.lat_deg)
    lam1 = math.radians(origin.lon_deg)
    theta = math.radians(bearing_deg)
    delta = distance_km / EARTH_RADIUS_KM
    sin_phi2 = math.sin(phi1) * math.cos(delta) + math.cos(phi1) * math.sin(delta) * math.cos(theta)
    phi2 = math.asin(min(max(sin_phi2, -1.0), 1.0))
    lam2 = lam1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(phi1),
        math.cos(delta) - math.sin(phi1) * sin_phi2,
    )
    lon = wrap_lon(math.degrees(lam2))
    return GeoCoord(math.degrees(phi2), lon)
