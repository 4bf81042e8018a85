"""
Chain-of-Region samples from boundaries
=======================================

Reverse geocoding walks country, region and city polygons. Each resolved
coordinate becomes a supervised sample whose answer ends in the pair.
"""

from geor.geodesy import GeoCoord
from geor.regions import BoundaryDB, reverse_geocode, synthesize_dataset


def box(lon0, lat0, lon1, lat1):
    return [[lon0, lat0], [lon1, lat0], [lon1, lat1], [lon0, lat1], [lon0, lat0]]


def feature(level, name, ring, parent=None):
    props = {"level": level, "name": name}
    if parent:
        props["parent"] = parent
    return {"type": "Feature", "properties": props, "geometry": {"type": "Polygon", "coordinates": [ring]}}


# A made-up country that crosses the antimeridian
geojson = {"type": "FeatureCollection", "features": [
    feature("country", "Dateline", box(170, -20, 190, 0)),
    feature("region", "West", box(170, -20, 180, 0), "Dateline"),
    feature("region", "East", box(180, -20, 190, 0), "Dateline"),
    feature("city", "Port", box(-178, -12, -176, -10), "East"),
]}
db = BoundaryDB.from_geojson(geojson)

print(reverse_geocode(GeoCoord(-11, -177), db))
print(reverse_geocode(GeoCoord(-5, 175), db))

records = [
    {"image_ref": "a.jpg", "lat": -11.0, "lon": -177.0},
    {"image_ref": "b.jpg", "lat": 45.0, "lon": 0.0},  # outside every country
    {"image_ref": "c.jpg", "lat": 95.0, "lon": 0.0},  # invalid
]
result = synthesize_dataset(records, db)
print(result.samples[0].response_text)
for skip in result.skipped:
    print("skipped", skip.to_dict())
