"""
Dropping the easy neighbourhoods
================================

Places a baseline already gets right form popular regions. Training
samples close to any of them are filtered out.
"""

import numpy as np

from geor.geodesy import GeoCoord
from geor.hardset import cluster_popular_regions, filter_hard, nearest_popular_km

rng = np.random.default_rng(0)

# correct seeds: tight clusters around two cities plus a handful of strays
seeds = [GeoCoord(48.86 + rng.normal(0, 0.05), 2.35 + rng.normal(0, 0.05)) for _ in range(50)]
seeds += [GeoCoord(35.68 + rng.normal(0, 0.05), 139.69 + rng.normal(0, 0.05)) for _ in range(30)]
seeds += [GeoCoord(rng.uniform(-60, 60), rng.uniform(-180, 180)) for _ in range(10)]
popular = cluster_popular_regions(seeds, cell_deg=1.0, min_count=20)
for r in popular:
    print(r)

samples = [({"id": i}, GeoCoord(rng.uniform(30, 60), rng.uniform(-10, 150))) for i in range(2000)]
res = filter_hard(samples, popular, radius_km=200.0)
print(len(res.retained), "retained,", res.excluded_count, "excluded")
closest = min(nearest_popular_km(c, popular) for _, c in res.retained)
print(f"closest retained sample is {closest:.1f} km from a popular centre")
