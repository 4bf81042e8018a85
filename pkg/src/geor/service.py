"""HTTP reward service and an evaluation client for chat-completion endpoints.

The reward app is stateless; each request is scored independently with
:func:`geor.reward.composite_reward`.

Routes::

    POST /v1/reward        {"prediction_text", "truth_lat", "truth_lon"}
    POST /v1/reward/batch  [<reward request>, ...]
    GET  /healthz
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import mimetypes
import os
import string
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import httpx
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .coords import parse_strict
from .evaluation import COLUMNS, THRESHOLDS_KM, EvalReport, ScoredPrediction, report_from_scores
from .geodesy import CoordinateError, GeoCoord, haversine_km
from .reward import composite_reward

log = logging.getLogger(__name__)

MAX_BODY_BYTES = 1 << 20
MAX_BATCH_BODY_BYTES = 64 << 20
MAX_BATCH_ITEMS = 10_000


class RequestError(ValueError):
    pass


@dataclass(frozen=True)
class RewardRequest:
    prediction_text: str
    truth: GeoCoord

    @classmethod
    def from_obj(cls, obj) -> "RewardRequest":
        if not isinstance(obj, dict):
            raise RequestError("request must be a JSON object")
        text = obj.get("prediction_text")
        if not isinstance(text, str):
            raise RequestError("prediction_text must be a string")
        lat, lon = obj.get("truth_lat"), obj.get("truth_lon")
        for name, v in (("truth_lat", lat), ("truth_lon", lon)):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise RequestError(f"{name} must be a number")
        try:
            truth = GeoCoord(lat, lon)
        except CoordinateError as exc:
            raise RequestError(f"invalid truth coordinate: {exc}") from exc
        return cls(text, truth)


def _error(status: int, msg: str) -> JSONResponse:
    return JSONResponse({"error": msg}, status_code=status)


async def _read_json(request: Request, limit: int):
    declared = request.headers.get("content-length")
    if declared is not None and declared.isdigit() and int(declared) > limit:
        return None, _error(413, f"body exceeds {limit} bytes")
    body = await request.body()
    if len(body) > limit:
        return None, _error(413, f"body exceeds {limit} bytes")
    try:
        return json.loads(body), None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        return None, _error(400, f"malformed JSON: {exc}")


def create_app() -> FastAPI:
    app = FastAPI(title="geor reward service", version=__version__)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/reward")
    async def reward(request: Request):
        obj, err = await _read_json(request, MAX_BODY_BYTES)
        if err is not None:
            return err
        try:
            req = RewardRequest.from_obj(obj)
        except RequestError as exc:
            return _error(400, str(exc))
        return composite_reward(req.prediction_text, req.truth).to_dict()

    @app.post("/v1/reward/batch")
    async def reward_batch(request: Request):
        obj, err = await _read_json(request, MAX_BATCH_BODY_BYTES)
        if err is not None:
            return err
        if not isinstance(obj, list):
            return _error(400, "batch body must be a JSON array")
        if len(obj) > MAX_BATCH_ITEMS:
            return _error(413, f"batch exceeds {MAX_BATCH_ITEMS} items")
        out = []
        for item in obj:
            try:
                req = RewardRequest.from_obj(item)
            except RequestError as exc:
                out.append({"error": str(exc)})
                continue
            out.append(composite_reward(req.prediction_text, req.truth).to_dict())
        return out

    return app


def serve(host: str = "127.0.0.1", port: int = 8000, log_level: str = "info") -> None:
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port, log_level=log_level)


# --- evaluation client -----------------------------------------------------

class EndpointUnreachableError(RuntimeError):
    pass


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model_name: str
    api_key: str | None = field(default=None, repr=False)
    timeout_s: float = 60.0
    max_retries: int = 3
    concurrency: int = 4
    backoff_s: float = 0.5
    send_images: bool = True

    def __post_init__(self):
        if not self.base_url:
            raise ValueError("base_url must be non-empty")
        if not self.timeout_s > 0:
            raise ValueError("timeout_s must be positive")
        if self.max_retries < 0 or self.concurrency < 1:
            raise ValueError("max_retries must be >= 0 and concurrency >= 1")

    @classmethod
    def from_env(cls, model_name: str, base_url: str | None = None, api_key: str | None = None, **kw):
        """Fill ``base_url``/``api_key`` from GEOR_ENDPOINT_URL/GEOR_API_KEY unless given."""
        return cls(
            base_url=base_url or os.environ.get("GEOR_ENDPOINT_URL", ""),
            model_name=model_name,
            api_key=api_key if api_key is not None else os.environ.get("GEOR_API_KEY"),
            **kw,
        )


def load_prompt_template(path=None) -> str:
    if path is not None:
        return Path(path).read_text(encoding="utf-8")
    return resources.files("geor").joinpath("data/eval_prompt.txt").read_text(encoding="utf-8")


def _image_url(ref: str) -> str:
    if ref.startswith(("http://", "https://", "data:")):
        return ref
    data = Path(ref).read_bytes()
    mime = mimetypes.guess_type(ref)[0] or "image/jpeg"
    return f"data:{mime};base64,{base64.b64encode(data).decode('ascii')}"


def build_messages(sample: dict, template: str, send_images: bool) -> list[dict]:
    text = sample.get("prompt")
    if text is None:
        fields = {k: v for k, v in sample.items() if isinstance(v, (str, int, float))}
        text = string.Template(template).safe_substitute(fields)
    ref = sample.get("image_ref")
    if send_images and ref:
        content = [
            {"type": "image_url", "image_url": {"url": _image_url(ref)}},
            {"type": "text", "text": text},
        ]
        return [{"role": "user", "content": content}]
    return [{"role": "user", "content": text}]


@dataclass
class EndpointRun:
    report: EvalReport
    transcript: list[dict]


def _headers(cfg: EndpointConfig) -> dict:
    h = {"Content-Type": "application/json"}
    if cfg.api_key:
        h["Authorization"] = f"Bearer {cfg.api_key}"
    return h


def _chat_url(cfg: EndpointConfig) -> str:
    return cfg.base_url.rstrip("/") + "/chat/completions"


def probe_endpoint(client: httpx.Client, cfg: EndpointConfig) -> None:
    """Fail fast when nothing answers at ``base_url``; any HTTP status counts as alive."""
    try:
        client.get(cfg.base_url.rstrip("/") + "/models", headers=_headers(cfg), timeout=cfg.timeout_s)
    except httpx.TransportError as exc:
        raise EndpointUnreachableError(f"cannot reach {cfg.base_url}: {type(exc).__name__}") from None


def _complete(client: httpx.Client, cfg: EndpointConfig, messages: list[dict]) -> tuple[str | None, str | None]:
    """Returns (text, error). Retries transport errors, 429 and 5xx with backoff."""
    payload = {"model": cfg.model_name, "messages": messages, "temperature": 0.0}
    err = None
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            time.sleep(cfg.backoff_s * 2 ** (attempt - 1))
        try:
            resp = client.post(_chat_url(cfg), json=payload, headers=_headers(cfg), timeout=cfg.timeout_s)
        except httpx.TransportError as exc:
            err = f"transport error: {type(exc).__name__}"
            continue
        if resp.status_code == 429 or resp.status_code >= 500:
            err = f"HTTP {resp.status_code}"
            continue
        if resp.status_code != 200:
            return None, f"HTTP {resp.status_code}"
        try:
            return resp.json()["choices"][0]["message"]["content"], None
        except (ValueError, KeyError, IndexError, TypeError):
            return None, "unexpected response shape"
    return None, err


def _truth_of(sample: dict) -> GeoCoord:
    if "truth_lat" in sample:
        return GeoCoord(sample["truth_lat"], sample["truth_lon"])
    return GeoCoord(sample["lat"], sample["lon"])


def _run_one(client, cfg, template, idx, sample) -> tuple[ScoredPrediction, dict]:
    sid = str(sample.get("id", idx))
    truth = _truth_of(sample)
    messages, text, err = None, None, None
    try:
        messages = build_messages(sample, template, cfg.send_images)
    except OSError as exc:
        err = f"image unreadable: {exc.strerror or exc}"
    if messages is not None:
        text, err = _complete(client, cfg, messages)
    digest = hashlib.sha256(json.dumps(messages, sort_keys=True).encode()).hexdigest()
    if text is None:
        log.warning("sample %s scored as a miss: %s", sid, err)
        status, dist = "request_failed", None
    else:
        outcome = parse_strict(text)
        status = outcome.status.value
        dist = haversine_km(outcome.coord, truth) if outcome.ok else None
    hits = tuple(dist is not None and dist <= t for t in THRESHOLDS_KM)
    scored = ScoredPrediction(sid, status, dist, hits)
    row = {
        "id": sid,
        "prompt_sha256": digest,
        "response": text,
        "status": status,
        "distance_km": dist,
        "hits": dict(zip(COLUMNS, hits)),
    }
    if err is not None:
        row["error"] = err
    return scored, row


def evaluate_endpoint_run(
    samples: Iterable[dict],
    endpoint: EndpointConfig,
    prompt_template: str | None = None,
    client: httpx.Client | None = None,
) -> EndpointRun:
    """Query the model once per sample and score the replies.

    Requests run on up to ``endpoint.concurrency`` threads; results are
    merged back in sample order. Failed requests count as unparsable misses.
    """
    samples = list(samples)
    template = prompt_template if prompt_template is not None else load_prompt_template()
    own = client is None
    client = client or httpx.Client()
    try:
        probe_endpoint(client, endpoint)
        with ThreadPoolExecutor(max_workers=endpoint.concurrency) as pool:
            results = list(pool.map(
                lambda pair: _run_one(client, endpoint, template, *pair),
                enumerate(samples),
            ))
    finally:
        if own:
            client.close()
    scores = [s for s, _ in results]
    return EndpointRun(report_from_scores(scores), [row for _, row in results])
