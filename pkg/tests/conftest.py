import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from geor.coords import render_pair
from geor.geodesy import GeoCoord, destination
from geor.regions import BoundaryDB

PLANTED_KM = (0.5, 30.0, 300.0, 3000.0)
PLANTED_FRACTIONS = (0.25, 0.25, 0.50, 0.75, 0.75)
PLANTED_TRUTHS = (
    GeoCoord(10.0, 20.0),
    GeoCoord(-33.8688, 151.2093),
    GeoCoord(40.7128, -74.006),
    GeoCoord(60.0, 10.0),
)


def box(lo, hi):
    """Closed square ring in GeoJSON (lon, lat) order."""
    return [[lo, lo], [hi, lo], [hi, hi], [lo, hi], [lo, lo]]


def feature(level, name, ring, parent=None):
    props = {"level": level, "name": name}
    if parent:
        props["parent"] = parent
    return {"type": "Feature", "properties": props,
            "geometry": {"type": "Polygon", "coordinates": [ring]}}


NESTED_GEOJSON = {
    "type": "FeatureCollection",
    "features": [
        feature("country", "A", box(0, 10)),
        feature("region", "A1", box(0, 5), "A"),
        feature("city", "A1x", box(0, 1), "A1"),
    ],
}


@pytest.fixture
def nested_db():
    return BoundaryDB.from_geojson(NESTED_GEOJSON)


def planted_predictions():
    """(id, truth, prediction text) with the prediction a known distance away."""
    out = []
    for i, (truth, d) in enumerate(zip(PLANTED_TRUTHS, PLANTED_KM)):
        pred = destination(truth, 37.0 * (i + 1), d)
        out.append((f"s{i}", truth, render_pair(pred, 6)))
    return out


class _MockHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def _send(self, status, obj):
        body = json.dumps(obj).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path.endswith("/models"):
            self._send(200, {"object": "list", "data": [{"id": "mock"}]})
        else:
            self._send(404, {"error": "not found"})

    def do_POST(self):
        n = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(n))
        srv = self.server
        with srv.lock:
            srv.requests.append({"payload": payload, "auth": self.headers.get("Authorization")})
        status, text = srv.responder(payload)
        if status != 200:
            self._send(status, {"error": "mock failure"})
            return
        self._send(200, {"choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]})


@pytest.fixture
def mock_model():
    """Real-socket OpenAI-compatible stub; set ``server.responder`` per test."""
    server = ThreadingHTTPServer(("127.0.0.1", 0), _MockHandler)
    server.lock = threading.Lock()
    server.requests = []
    server.responder = lambda payload: (200, "unknown")
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server.base_url = f"http://127.0.0.1:{server.server_address[1]}/v1"
    yield server
    server.shutdown()
    server.server_close()


def prompt_text(payload):
    content = payload["messages"][0]["content"]
    if isinstance(content, list):
        return next(p["text"] for p in content if p["type"] == "text")
    return content


def law_of_cosines_km(a, b):
    """Independent distance oracle: spherical law of cosines."""
    p1, p2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dl = math.radians(b.lon_deg - a.lon_deg)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return 6371.0 * math.acos(max(-1.0, min(1.0, c)))
