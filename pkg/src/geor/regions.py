"""Chain-of-Region synthesis: coordinates to (country, region, city) chains.

Boundaries come from a GeoJSON FeatureCollection whose features carry
``level`` (``country``/``region``/``city``), ``name`` and optionally
``parent`` properties. Rings are held in (lon, lat) order internally.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .coords import render_pair
from .geodesy import CoordinateError, GeoCoord
from .jsonl import BadLine

log = logging.getLogger(__name__)

LEVELS = ("country", "region", "city")

PROMPT_TEXT = (
    "Where was this photo taken? Reason from coarse to fine: name the country, "
    "then the region, then the city, and finish with the coordinates as "
    "(latitude, longitude)."
)


class UnresolvedChainError(ValueError):
    pass


def _as_ring(ring) -> np.ndarray:
    pts = []
    for v in ring:
        if isinstance(v, GeoCoord):
            pts.append((v.lon_deg, v.lat_deg))
        else:
            # plain pairs are GeoJSON order: (lon, lat)
            lon, lat = float(v[0]), float(v[1])
            pts.append((lon, lat))
    arr = np.array(pts, dtype=float).reshape(-1, 2)
    if len(arr) < 4:
        raise ValueError(f"ring needs >= 4 vertices, got {len(arr)}")
    if not np.array_equal(arr[0], arr[-1]):
        raise ValueError("ring is not closed (first vertex != last vertex)")
    return arr


@dataclass(frozen=True)
class AdminRegion:
    level: str
    name: str
    rings: tuple = field(repr=False)
    parent_name: str | None = None

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"unknown level {self.level!r}")
        if self.level == "country" and self.parent_name is not None:
            raise ValueError("a country has no parent")
        rings = tuple(r if isinstance(r, np.ndarray) else _as_ring(r) for r in self.rings)
        if not rings:
            raise ValueError(f"region {self.name!r} has no rings")
        object.__setattr__(self, "rings", rings)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        """(min_lon, min_lat, max_lon, max_lat)"""
        allpts = np.concatenate(self.rings)
        lo, hi = allpts.min(axis=0), allpts.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def _on_ring_boundary(x: float, y: float, ring: np.ndarray, tol: float = 1e-12) -> bool:
    x1, y1 = ring[:-1, 0], ring[:-1, 1]
    x2, y2 = ring[1:, 0], ring[1:, 1]
    cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
    scale = np.maximum(np.hypot(x2 - x1, y2 - y1), 1.0)
    within = (
        (np.minimum(x1, x2) - tol <= x) & (x <= np.maximum(x1, x2) + tol)
        & (np.minimum(y1, y2) - tol <= y) & (y <= np.maximum(y1, y2) + tol)
    )
    return bool(np.any(within & (np.abs(cross) <= tol * scale)))


def _crossings(x: float, y: float, ring: np.ndarray) -> int:
    x1, y1 = ring[:-1, 0], ring[:-1, 1]
    x2, y2 = ring[1:, 0], ring[1:, 1]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    return int(np.count_nonzero(straddle & (x < x_at)))


def point_in_region(p: GeoCoord, region: AdminRegion) -> bool:
    """Even-odd rule across all rings; points on an edge or vertex are inside."""
    x, y = p.lon_deg, p.lat_deg
    total = 0
    for ring in region.rings:
        if _on_ring_boundary(x, y, ring):
            return True
        total += _crossings(x, y, ring)
    return total % 2 == 1


def _clip_halfplane(ring: np.ndarray, x0: float, keep_left: bool) -> np.ndarray | None:
    """Sutherland-Hodgman clip of a closed ring against the line lon = x0."""
    def inside(pt):
        return pt[0] <= x0 if keep_left else pt[0] >= x0

    out = []
    pts = ring[:-1]
    for i in range(len(pts)):
        cur, nxt = pts[i], pts[(i + 1) % len(pts)]
        cin, nin = inside(cur), inside(nxt)
        if cin:
            out.append(cur)
        if cin != nin:
            t = (x0 - cur[0]) / (nxt[0] - cur[0])
            out.append((x0, cur[1] + t * (nxt[1] - cur[1])))
    if len(out) < 3:
        return None
    out.append(out[0])
    return np.array(out, dtype=float)


def split_antimeridian(ring: np.ndarray) -> list[np.ndarray]:
    """Split a ring crossing +/-180 into pieces that each lie within [-180, 180].

    Handles both encodings: a jump between consecutive vertices (170 -> -170)
    and a continuous ring that runs past 180 (170 -> 190).
    """
    lon = ring[:, 0]
    if not np.any(np.abs(np.diff(lon)) > 180.0) and lon.min() >= -180.0 and lon.max() <= 180.0:
        return [ring]
    # unwrap so consecutive vertices are < 180 degrees apart
    unwrapped = ring.copy()
    unwrapped[:, 0] = np.degrees(np.unwrap(np.radians(lon)))
    pieces = []
    lo, hi = unwrapped[:, 0].min(), unwrapped[:, 0].max()
    k_lo = math.floor((lo + 180.0) / 360.0)
    k_hi = math.floor((hi + 180.0) / 360.0)
    for k in range(k_lo, k_hi + 1):
        west, east = -180.0 + 360.0 * k, 180.0 + 360.0 * k
        piece = _clip_halfplane(unwrapped, west, keep_left=False)
        if piece is not None:
            piece = _clip_halfplane(piece, east, keep_left=True)
        if piece is not None:
            piece = piece.copy()
            piece[:, 0] -= 360.0 * k
            pieces.append(piece)
    return pieces


class BoundaryDB:
    """Administrative polygons indexed by level, with bounding-box pruning."""

    def __init__(self, regions: Iterable[AdminRegion]):
        self.regions: list[AdminRegion] = []
        for reg in regions:
            rings = []
            for ring in reg.rings:
                rings.extend(split_antimeridian(ring))
            self.regions.append(AdminRegion(reg.level, reg.name, tuple(rings), reg.parent_name))
        self.by_level: dict[str, list[int]] = {lvl: [] for lvl in LEVELS}
        for i, reg in enumerate(self.regions):
            self.by_level[reg.level].append(i)
        self.bboxes = np.array([r.bbox for r in self.regions], dtype=float).reshape(-1, 4)

    def __len__(self):
        return len(self.regions)

    def containing(self, p: GeoCoord, level: str) -> list[AdminRegion]:
        idx = self.by_level[level]
        if not idx:
            return []
        bb = self.bboxes[idx]
        x, y = p.lon_deg, p.lat_deg
        hit = (bb[:, 0] <= x) & (x <= bb[:, 2]) & (bb[:, 1] <= y) & (y <= bb[:, 3])
        found = [self.regions[idx[j]] for j in np.flatnonzero(hit)]
        return sorted((r for r in found if point_in_region(p, r)), key=lambda r: r.name)

    @classmethod
    def from_geojson(cls, source) -> "BoundaryDB":
        """Load a FeatureCollection from a path, a JSON string or a parsed dict."""
        if isinstance(source, dict):
            doc = source
        elif isinstance(source, str) and source.lstrip().startswith("{"):
            doc = json.loads(source)
        else:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        regions = []
        for feat in doc.get("features", []):
            props = feat.get("properties") or {}
            geom = feat.get("geometry") or {}
            gtype = geom.get("type")
            if gtype == "Polygon":
                rings = list(geom["coordinates"])
            elif gtype == "MultiPolygon":
                rings = [ring for poly in geom["coordinates"] for ring in poly]
            else:
                log.warning("skipping feature %r with geometry %r", props.get("name"), gtype)
                continue
            regions.append(AdminRegion(
                level=props["level"],
                name=str(props["name"]),
                rings=tuple(rings),
                parent_name=props.get("parent"),
            ))
        return cls(regions)


@dataclass(frozen=True)
class RegionChain:
    coord: GeoCoord
    country: str | None = None
    region: str | None = None
    city: str | None = None

    def __post_init__(self):
        if self.city is not None and self.region is None:
            raise ValueError("a chain with a city must also have a region")
        if self.region is not None and self.country is None:
            raise ValueError("a chain with a region must also have a country")

    @property
    def resolved(self) -> bool:
        return self.country is not None


def _pick(candidates: list[AdminRegion], parent: str) -> AdminRegion | None:
    # untagged parents are trusted; tagged ones must match the chosen level above
    for reg in candidates:
        if reg.parent_name is None or reg.parent_name == parent:
            return reg
    return None


def reverse_geocode(p: GeoCoord, db: BoundaryDB) -> RegionChain:
    """Resolve ``p`` level by level; ties break on ascending name.

    A point outside every country yields an unresolved chain holding only
    the coordinate.
    """
    countries = db.containing(p, "country")
    if not countries:
        return RegionChain(p)
    country = countries[0]
    region = _pick(db.containing(p, "region"), country.name)
    if region is None:
        return RegionChain(p, country.name)
    city = _pick(db.containing(p, "city"), region.name)
    return RegionChain(p, country.name, region.name, city.name if city else None)


@dataclass(frozen=True)
class CoRSample:
    image_ref: str
    chain: RegionChain
    target: GeoCoord
    prompt_text: str
    response_text: str

    def to_dict(self) -> dict:
        return {
            "image_ref": self.image_ref,
            "country": self.chain.country,
            "region": self.chain.region,
            "city": self.chain.city,
            "lat": self.target.lat_deg,
            "lon": self.target.lon_deg,
            "prompt": self.prompt_text,
            "response": self.response_text,
        }


def render_cor_sample(image_ref: str, chain: RegionChain, target: GeoCoord) -> CoRSample:
    """Fill the fixed coarse-to-fine response template.

    The coordinate is written at 4 decimals, and ``target`` on the returned
    sample is that rounded value, so it matches the text exactly.
    """
    if not chain.resolved:
        raise UnresolvedChainError(f"{image_ref}: no country contains {target}")
    pair = render_pair(target, 4)
    rounded = GeoCoord(float(f"{target.lat_deg:.4f}"), float(f"{target.lon_deg:.4f}"))
    response = "\n".join([
        f"Country: {chain.country}",
        f"Region: {chain.region or 'unknown'}",
        f"City: {chain.city or 'unknown'}",
        f"Coordinates: {pair}",
    ])
    return CoRSample(image_ref, chain, rounded, PROMPT_TEXT, response)


@dataclass(frozen=True)
class SkipEntry:
    image_ref: str | None
    reason: str

    def to_dict(self) -> dict:
        return {"image_ref": self.image_ref, "reason": self.reason}


@dataclass
class SynthesisResult:
    samples: list[CoRSample]
    skipped: list[SkipEntry]


def _coerce_record(rec) -> tuple[str, GeoCoord]:
    if isinstance(rec, dict):
        ref = rec.get("image_ref")
        if not isinstance(ref, str):
            raise ValueError("missing or non-string image_ref")
        if "lat" not in rec or "lon" not in rec:
            raise ValueError("missing lat/lon")
        if isinstance(rec["lat"], bool) or isinstance(rec["lon"], bool):
            raise ValueError("lat/lon must be numbers")
        return ref, GeoCoord(rec["lat"], rec["lon"])
    ref, coord = rec
    if not isinstance(coord, GeoCoord):
        coord = GeoCoord(*coord)
    return str(ref), coord


def iter_synthesis(records: Iterable, db: BoundaryDB) -> Iterator[CoRSample | SkipEntry]:
    """Stream samples and skip entries in input order.

    ``records`` holds dicts with ``image_ref``/``lat``/``lon``, or
    ``(image_ref, GeoCoord)`` pairs. Anything that fails to coerce, including
    :class:`BadLine` markers, becomes a :class:`SkipEntry`.
    """
    for rec in records:
        ref = rec.get("image_ref") if isinstance(rec, dict) else None
        if isinstance(rec, BadLine):
            entry = SkipEntry(None, rec.reason)
        else:
            try:
                ref, coord = _coerce_record(rec)
            except (CoordinateError, ValueError, TypeError) as exc:
                entry = SkipEntry(ref if isinstance(ref, str) else None, f"unreadable record: {exc}")
            else:
                chain = reverse_geocode(coord, db)
                if chain.resolved:
                    yield render_cor_sample(ref, chain, coord)
                    continue
                entry = SkipEntry(ref, "unresolved: no country polygon contains the coordinate")
        log.info("skipping %s: %s", entry.image_ref, entry.reason)
        yield entry


def synthesize_dataset(records: Iterable, db: BoundaryDB) -> SynthesisResult:
    samples, skipped = [], []
    for item in iter_synthesis(records, db):
        (samples if isinstance(item, CoRSample) else skipped).append(item)
    return SynthesisResult(samples, skipped)
