"""
Scoring a coordinate guess
==========================

A model answer is free text. The reward only counts it when it holds
exactly one ``(lat, lon)`` pair, and then scores the pair by its
great-circle error.
"""

from geor.coords import parse_strict
from geor.geodesy import GeoCoord, haversine_km
from geor.reward import composite_reward, distance_reward

rome = GeoCoord(41.9028, 12.4964)

# A few answers of different quality
answers = [
    "Coordinates: (41.9028, 12.4964)",
    "Probably Paris: (48.8566, 2.3522)",
    "Either (41.9, 12.5) or (45.46, 9.19)",
    "Somewhere in Italy.",
    "(141.9, 12.5)",
]
for text in answers:
    r = composite_reward(text, rome)
    print(f"{text!r:42} status={r.parse_status:15} d={r.distance_km} reward={r.r_total:.4f}")

# The distance term on its own: linear pieces with knees at 750 and 2500 km
for d in (0, 100, 750, 1500, 2500, 10000, 20000, 20015.09):
    print(f"{d:>9} km -> {distance_reward(d):.4f}")

# haversine is what sits underneath
print(haversine_km(rome, GeoCoord(48.8566, 2.3522)))
print(parse_strict("(48.8566, 2.3522)").to_dict())
