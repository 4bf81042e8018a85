"""
Threshold accuracy tables
=========================

Each prediction either lands within a distance band or it does not.
Answers that cannot be parsed stay in the denominator as misses.
"""

from geor.evaluation import EvalReport, PredictionRecord, render_csv, render_markdown, threshold_accuracy
from geor.geodesy import GeoCoord

truth = GeoCoord(40.7128, -74.006)
preds = [
    PredictionRecord("a", truth, "(40.7130, -74.0060)"),
    PredictionRecord("b", truth, "(42.3601, -71.0589)"),   # Boston
    PredictionRecord("c", truth, "(34.0522, -118.2437)"),  # Los Angeles
    PredictionRecord("d", truth, "New York, I think"),
]
ours = threshold_accuracy(preds)
print(ours.to_dict())

reference = EvalReport((0.181, 0.4153, 0.5831, 0.7533, 0.8642), 3000, 0)
rows = [("toy", ours), ("reference", reference)]
print(render_markdown(rows))
print(render_csv(rows))
