"""
Reward over HTTP
================

The same reward behind a small web app, exercised in-process here. Use
``geor serve`` to run it for real.
"""

from fastapi.testclient import TestClient

from geor.service import create_app

client = TestClient(create_app())
print(client.get("/healthz").json())
print(client.post("/v1/reward", json={
    "prediction_text": "Country: France\nCoordinates: (48.8566, 2.3522)",
    "truth_lat": 48.8566, "truth_lon": 2.3522,
}).json())

batch = [
    {"prediction_text": "(10, 10)", "truth_lat": 11, "truth_lon": 11},
    {"prediction_text": "(10, 10)", "truth_lat": 123, "truth_lon": 11},
]
for row in client.post("/v1/reward/batch", json=batch).json():
    print(row)
