"""
Why easy data stops teaching
============================

A toy Gaussian policy per query, trained on the composite reward. Once the
easy queries are solved every candidate scores the same and the group
advantages vanish. Mixing in far-off queries keeps reward variance alive.
"""

import numpy as np

from geor.geodesy import GeoCoord
from geor.policy_sim import SimConfig, SimQuery, simulate_training

rng = np.random.default_rng(2024)
truths = [GeoCoord(round(rng.uniform(-60, 60), 4), round(rng.uniform(-170, 170), 4)) for _ in range(32)]
easy = [SimQuery(t, "easy") for t in truths[:16]]
mixed = easy + [SimQuery(t, "hard") for t in truths[16:]]

cfg = SimConfig(iters=200, seed=0)
a = simulate_training(easy, cfg)
b = simulate_training(mixed, cfg)

print(" iter   easy:rate  var        mixed:rate  var")
for i in range(0, 200, 25):
    ea, mb = a.entries[i], b.entries[i]
    print(f"{i:5d}   {ea.vanishing_rate:.3f}   {ea.mean_group_variance:.2e}   "
          f"{mb.vanishing_rate:.3f}   {mb.mean_group_variance:.2e}")
print("final", a.entries[-1].vanishing_rate, b.entries[-1].vanishing_rate)
