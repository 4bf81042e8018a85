import csv
import json
import shutil
import subprocess

import pytest

from conftest import NESTED_GEOJSON, PLANTED_FRACTIONS, planted_predictions
from geor.cli import main
from geor.geodesy import GeoCoord
from geor.reward import composite_reward


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return str(path)


def read_jsonl(path):
    return [json.loads(line) for line in open(path) if line.strip()]


def test_reward(capsys):
    assert main(["reward", "--pred", "(48.8566, 2.3522)", "--truth", "41.9028,12.4964"]) == 0
    out = json.loads(capsys.readouterr().out)
    expected = composite_reward("(48.8566, 2.3522)", GeoCoord(41.9028, 12.4964)).to_dict()
    assert out == expected


def test_reward_stdin(capsys, monkeypatch):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO("(0, 0)"))
    assert main(["reward", "--truth", "0,0"]) == 0
    assert json.loads(capsys.readouterr().out)["r_total"] == 1.0


def test_parse(capsys):
    assert main(["parse", "--text", "a (1, 2) b (3, 4)"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "multiple_pairs"


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["reward", "--pred", "x", "--truth", "95,0"],
    ["reward", "--pred", "x"],
    ["eval"],
    ["eval", "--preds", "a", "--samples", "b"],
    ["simulate", "--queries", "q", "--group-size", "1"],
    ["filter-hard", "--records", "r", "--correct", "c", "--radius-km", "-1"],
])
def test_usage_errors_exit_2(argv, monkeypatch):
    monkeypatch.delenv("GEOR_ENDPOINT_URL", raising=False)
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_eval_samples_without_endpoint(monkeypatch, tmp_path):
    monkeypatch.delenv("GEOR_ENDPOINT_URL", raising=False)
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--samples", str(tmp_path / "s.jsonl")])
    assert exc.value.code == 2


def test_missing_file_exit_1(tmp_path, capsys):
    assert main(["eval", "--preds", str(tmp_path / "nope.jsonl")]) == 1
    assert "error" in capsys.readouterr().err


def test_help_shows_defaults(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["filter-hard", "--help"])
    assert exc.value.code == 0
    out = " ".join(capsys.readouterr().out.split())
    assert "default: 200.0" in out and "default: 20" in out


def _planted_preds(tmp_path):
    rows = [{"id": i, "truth_lat": t.lat_deg, "truth_lon": t.lon_deg, "predicted_text": text}
            for i, t, text in planted_predictions()]
    return write_jsonl(tmp_path / "preds.jsonl", rows)


def test_eval_preds(tmp_path, capsys):
    preds = _planted_preds(tmp_path)
    out_csv, out_json = tmp_path / "r.csv", tmp_path / "r.json"
    assert main(["eval", "--preds", preds, "--label", "planted", "--out", str(out_csv),
                 "--json-out", str(out_json)]) == 0
    md = capsys.readouterr().out
    assert "| planted | 25.00 | 25.00 | 50.00 | 75.00 | 75.00 |" in md
    rows = list(csv.reader(open(out_csv)))
    assert rows[0] == ["method", "1km", "25km", "200km", "750km", "2500km"]
    assert rows[1] == ["planted", "25.00", "25.00", "50.00", "75.00", "75.00"]
    assert tuple(json.load(open(out_json))["fractions"]) == PLANTED_FRACTIONS


def test_eval_endpoint(tmp_path, capsys, mock_model):
    samples = write_jsonl(tmp_path / "s.jsonl", [{"id": "a", "truth_lat": 1, "truth_lon": 2, "prompt": "p"}])
    mock_model.responder = lambda p: (200, "(1, 2)")
    tr = tmp_path / "t.jsonl"
    assert main(["eval", "--samples", samples, "--endpoint-url", mock_model.base_url,
                 "--transcript", str(tr)]) == 0
    assert "100.00" in capsys.readouterr().out
    assert read_jsonl(tr)[0]["status"] == "valid"


def test_eval_endpoint_unreachable(tmp_path):
    samples = write_jsonl(tmp_path / "s.jsonl", [{"id": "a", "truth_lat": 1, "truth_lon": 2}])
    assert main(["eval", "--samples", samples, "--endpoint-url", "http://127.0.0.1:9/v1", "--timeout", "2"]) == 1


def test_synth(tmp_path):
    bounds = tmp_path / "b.geojson"
    bounds.write_text(json.dumps(NESTED_GEOJSON))
    recs = write_jsonl(tmp_path / "r.jsonl", [
        {"image_ref": "a.jpg", "lat": 0.5, "lon": 0.5},
        {"image_ref": "b.jpg", "lat": 50, "lon": 50},
        {"image_ref": "c.jpg", "lat": 3, "lon": 3},
    ])
    (tmp_path / "r.jsonl").write_text((tmp_path / "r.jsonl").read_text() + "not json\n")
    out, skips = tmp_path / "o.jsonl", tmp_path / "s.jsonl"
    assert main(["synth", "--records", recs, "--boundaries", str(bounds), "--out", str(out),
                 "--skip-log", str(skips)]) == 0
    rows = read_jsonl(out)
    assert [(r["image_ref"], r["country"], r["region"], r["city"]) for r in rows] == [
        ("a.jpg", "A", "A1", "A1x"), ("c.jpg", "A", "A1", None)]
    assert len(read_jsonl(skips)) == 2


def test_filter_hard(tmp_path):
    # 20 correct seeds around (10, 10) make one popular region at min-count 20
    correct = write_jsonl(tmp_path / "c.jsonl", [
        {"id": i, "truth_lat": 10 + i * 0.01, "truth_lon": 10, "pred_lat": 10 + i * 0.01, "pred_lon": 10}
        for i in range(20)])
    recs = write_jsonl(tmp_path / "r.jsonl", [
        {"id": "near", "lat": 10.5, "lon": 10.5},
        {"id": "far", "lat": -40, "lon": 100},
    ])
    out, rep = tmp_path / "o.jsonl", tmp_path / "x.jsonl"
    assert main(["filter-hard", "--records", recs, "--correct", correct, "--out", str(out),
                 "--report", str(rep)]) == 0
    assert [r["id"] for r in read_jsonl(out)] == ["far"]
    assert [r["id"] for r in read_jsonl(rep)] == ["near"]


def test_simulate_deterministic(tmp_path):
    q = write_jsonl(tmp_path / "q.jsonl", [{"lat": 1.0, "lon": 2.0, "tag": "easy"},
                                           {"lat": -30, "lon": 150, "tag": "hard"}])
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        assert main(["simulate", "--queries", q, "--iters", "5", "--seed", "3", "--trace-out", str(path)]) == 0
    assert a.read_text() == b.read_text()
    rows = read_jsonl(a)
    assert len(rows) == 5 and rows[0]["config"]["seed"] == 3


@pytest.mark.skipif(shutil.which("geor") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["geor", "reward", "--pred", "(0, 0)", "--truth", "0,0"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and json.loads(proc.stdout)["r_total"] == 1.0
    assert subprocess.run(["geor", "nope"], capture_output=True, timeout=60).returncode == 2
