"""``geor`` command line: one subcommand per pipeline stage.

Exit codes: 0 success, 1 operational failure, 2 usage error. Diagnostics go
to stderr; machine output goes to stdout or ``--out``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .coords import parse_strict
from .evaluation import PredictionRecord, render_csv, render_markdown, threshold_accuracy
from .geodesy import CoordinateError, GeoCoord
from .hardset import (
    DEFAULT_CELL_DEG,
    DEFAULT_CORRECT_THRESHOLD_KM,
    DEFAULT_MIN_COUNT,
    DEFAULT_RADIUS_KM,
    cluster_popular_regions,
    filter_hard,
    select_correct,
)
from .jsonl import BadLine, iter_jsonl, write_jsonl
from .policy_sim import SimConfig, SimQuery, simulate_training
from .regions import BoundaryDB, iter_synthesis, CoRSample
from .reward import composite_reward

log = logging.getLogger("geor")


class OperationalError(Exception):
    """Failure that should exit with status 1."""


def _coord_arg(text: str) -> GeoCoord:
    try:
        lat, lon = (float(x) for x in text.split(","))
        return GeoCoord(lat, lon)
    except (ValueError, CoordinateError) as exc:
        raise argparse.ArgumentTypeError(f"expected LAT,LON in range, got {text!r} ({exc})")


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _records(path: str):
    """Dict rows of a JSONL file; junk lines are logged and skipped."""
    for row in iter_jsonl(path):
        if isinstance(row, BadLine):
            log.warning("%s: %s", path, row.reason)
            continue
        yield row


# --- subcommands -------------------------------------------------------------

def cmd_reward(args) -> int:
    text = args.pred if args.pred is not None else sys.stdin.read()
    br = composite_reward(text, args.truth)
    _emit(json.dumps(br.to_dict()) + "\n", args.out)
    return 0


def cmd_parse(args) -> int:
    text = args.text if args.text is not None else sys.stdin.read()
    _emit(json.dumps(parse_strict(text).to_dict()) + "\n", args.out)
    return 0


def cmd_synth(args) -> int:
    db = BoundaryDB.from_geojson(args.boundaries)
    samples, skips = [], []
    for item in iter_synthesis(iter_jsonl(args.records), db):
        if isinstance(item, CoRSample):
            samples.append(item.to_dict())
        else:
            skips.append(item.to_dict())
    write_jsonl(samples, args.out)
    if args.skip_log:
        write_jsonl(skips, args.skip_log)
    log.info("synthesized %d samples, skipped %d", len(samples), len(skips))
    return 0


def _row_coord(row: dict, lat_key: str, lon_key: str) -> GeoCoord:
    return GeoCoord(row[lat_key], row[lon_key])


def cmd_filter_hard(args) -> int:
    preds, truths = [], []
    for row in _records(args.correct):
        try:
            rec = PredictionRecord.from_dict(row)
        except (KeyError, CoordinateError, TypeError) as exc:
            log.warning("skipping seed row: %s", exc)
            continue
        pred = rec.predicted or parse_strict(rec.predicted_text or "").coord
        preds.append(pred)
        truths.append(rec.truth)
    seeds = select_correct(preds, truths, args.correct_threshold_km)
    popular = cluster_popular_regions(seeds, args.cell_deg, args.min_count)
    log.info("%d correct seeds -> %d popular regions", len(seeds), len(popular))

    samples = []
    for i, row in enumerate(_records(args.records)):
        try:
            samples.append((row, _row_coord(row, "lat", "lon")))
        except (KeyError, CoordinateError, TypeError) as exc:
            log.warning("skipping record %d: %s", i, exc)
    result = filter_hard(samples, popular, args.radius_km, args.cell_deg)
    write_jsonl((rec for rec, _ in result.retained), args.out)
    if args.report:
        write_jsonl(({
            "id": ex.record.get("id", ex.record.get("image_ref", ex.index)),
            "nearest_lat": ex.nearest_center.lat_deg,
            "nearest_lon": ex.nearest_center.lon_deg,
            "distance_km": ex.distance_km,
        } for ex in result.excluded), args.report)
    log.info("retained %d, excluded %d", len(result.retained), result.excluded_count)
    return 0


def cmd_eval(args) -> int:
    if args.preds:
        records = []
        for row in _records(args.preds):
            try:
                records.append(PredictionRecord.from_dict(row))
            except (KeyError, CoordinateError, TypeError) as exc:
                raise OperationalError(f"bad prediction row {row.get('id')!r}: {exc}")
        if not records:
            raise OperationalError(f"{args.preds}: no prediction records")
        report = threshold_accuracy(records)
    else:
        from .service import EndpointConfig, EndpointUnreachableError, evaluate_endpoint_run, load_prompt_template

        cfg = EndpointConfig.from_env(
            args.model, base_url=args.endpoint_url, concurrency=args.concurrency,
            max_retries=args.max_retries, timeout_s=args.timeout,
        )
        samples = list(_records(args.samples))
        if not samples:
            raise OperationalError(f"{args.samples}: no samples")
        template = load_prompt_template(args.prompt_template)
        try:
            run = evaluate_endpoint_run(samples, cfg, template)
        except EndpointUnreachableError as exc:
            raise OperationalError(str(exc))
        report = run.report
        if args.transcript:
            write_jsonl(run.transcript, args.transcript)
    rows = [(args.label, report)]
    sys.stdout.write(render_markdown(rows))
    if args.out:
        Path(args.out).write_text(render_csv(rows), encoding="utf-8")
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_simulate(args) -> int:
    queries = []
    for row in _records(args.queries):
        try:
            queries.append(SimQuery(GeoCoord(row["lat"], row["lon"]), row.get("tag", "easy")))
        except (KeyError, CoordinateError, TypeError, ValueError) as exc:
            raise OperationalError(f"bad query row: {exc}")
    if not queries:
        raise OperationalError(f"{args.queries}: no queries")
    cfg = SimConfig(
        iters=args.iters, group_size=args.group_size, seed=args.seed, lr=args.lr,
        natural_gradient=not args.plain_gradient,
    )
    trace = simulate_training(queries, cfg)
    write_jsonl(trace.to_rows(), args.trace_out or args.out)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.host, args.port, "debug" if args.verbose else "info")
    return 0


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (where randomness exists)")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    common.add_argument("--out", default=None, help="output path (stdout when omitted)")

    p = argparse.ArgumentParser(prog="geor", description=__doc__.splitlines()[0], formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"geor {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", required=True)

    s = sub.add_parser("reward", parents=[common], formatter_class=fmt,
                       help="composite reward for one prediction")
    s.add_argument("--pred", default=None, help="prediction text (stdin when omitted)")
    s.add_argument("--truth", type=_coord_arg, required=True, help="ground truth as LAT,LON")
    s.set_defaults(func=cmd_reward)

    s = sub.add_parser("parse", parents=[common], formatter_class=fmt,
                       help="strict coordinate parse of a text")
    s.add_argument("--text", default=None, help="text to parse (stdin when omitted)")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("synth", parents=[common], formatter_class=fmt,
                       help="Chain-of-Region samples from coordinate records")
    s.add_argument("--records", required=True, help="JSONL with image_ref, lat, lon")
    s.add_argument("--boundaries", required=True, help="GeoJSON FeatureCollection of admin regions")
    s.add_argument("--skip-log", default=None, help="JSONL path for skipped records")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("filter-hard", parents=[common], formatter_class=fmt,
                       help="drop records near popular regions")
    s.add_argument("--records", required=True, help="JSONL records with lat, lon")
    s.add_argument("--correct", required=True,
                   help="JSONL predictions (id, truth_lat, truth_lon, predicted_text or pred_lat/pred_lon) "
                        "used to find correctly localized seeds")
    s.add_argument("--radius-km", type=_positive(float), default=DEFAULT_RADIUS_KM,
                   help="exclusion radius around popular centres")
    s.add_argument("--cell-deg", type=_positive(float), default=DEFAULT_CELL_DEG, help="grid cell size in degrees")
    s.add_argument("--min-count", type=_positive(int), default=DEFAULT_MIN_COUNT,
                   help="correct seeds needed for a cell to count as popular")
    s.add_argument("--correct-threshold-km", type=_positive(float), default=DEFAULT_CORRECT_THRESHOLD_KM,
                   help="max error for a seed prediction to count as correct")
    s.add_argument("--report", default=None, help="JSONL exclusion report path")
    s.set_defaults(func=cmd_filter_hard)

    s = sub.add_parser("eval", parents=[common], formatter_class=fmt,
                       help="threshold accuracy from predictions or a live endpoint")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--preds", help="JSONL predictions (id, truth_lat, truth_lon, predicted_text or pred_lat/pred_lon)")
    src.add_argument("--samples", help="JSONL samples to send to a chat-completions endpoint")
    s.add_argument("--label", default="run", help="row label in the report")
    s.add_argument("--json-out", default=None, help="machine-readable JSON report path")
    s.add_argument("--endpoint-url", default=None, help="OpenAI-compatible base URL (env GEOR_ENDPOINT_URL)")
    s.add_argument("--model", default="default", help="model name sent to the endpoint")
    s.add_argument("--concurrency", type=_positive(int), default=4, help="parallel requests")
    s.add_argument("--max-retries", type=int, default=3, help="retries on transport errors, 429 and 5xx")
    s.add_argument("--timeout", type=_positive(float), default=60.0, help="per-request timeout in seconds")
    s.add_argument("--prompt-template", default=None, help="prompt template file (bundled default when omitted)")
    s.add_argument("--transcript", default=None, help="JSONL per-sample transcript path")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("simulate", parents=[common], formatter_class=fmt,
                       help="toy-policy RL run, trace as JSONL")
    s.add_argument("--queries", required=True, help="JSONL with lat, lon, tag (easy|hard)")
    s.add_argument("--iters", type=int, default=SimConfig.iters, help="training iterations")
    s.add_argument("--group-size", type=int, default=SimConfig.group_size, help="candidates per query")
    s.add_argument("--lr", type=_positive(float), default=SimConfig.lr, help="learning rate")
    s.add_argument("--plain-gradient", action="store_true",
                   help="use the unpreconditioned score-function gradient")
    s.add_argument("--trace-out", default=None, help="trace JSONL path (falls back to --out)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("serve", parents=[common], formatter_class=fmt, help="run the HTTP reward service")
    s.add_argument("--host", default="127.0.0.1", help="bind address")
    s.add_argument("--port", type=int, default=8000, help="bind port")
    s.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "simulate" and args.group_size < 2:
        parser.error("--group-size must be >= 2")
    if args.command == "simulate" and args.iters < 0:
        parser.error("--iters must be >= 0")
    if args.command == "eval" and args.samples and not (args.endpoint_url or os.environ.get("GEOR_ENDPOINT_URL")):
        parser.error("--samples needs --endpoint-url or GEOR_ENDPOINT_URL")
    try:
        return args.func(args)
    except (OSError, OperationalError, ValueError) as exc:
        print(f"geor {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
