"""End-to-end command line tests, run in process via main(argv)."""

import csv
import json
import os

import pytest

from simdioph.cli import main
from simdioph.construction import run
from simdioph.errors import SearchExhausted
from simdioph.trace_io import dumps_trace, load_trace


def _csv_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_bestapprox_rational_with_figure(tmp_path, capsys):
    rc = main(["bestapprox", "--xi1", "5/7", "--Q", "100",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    rows = _csv_rows(tmp_path / "bestapprox.csv")
    assert rows[0][0] == "q"
    assert [r[0] for r in rows[1:]] == ["1", "3", "7"]
    doc = _read_json(tmp_path / "bestapprox.json")
    assert doc["kind"] == "bestapprox-report" and len(doc["entries"]) == 3
    png = tmp_path / "bestapprox.png"
    assert png.exists() and png.stat().st_size > 0
    assert "3 jumps" in capsys.readouterr().out


def test_bestapprox_pair_rational(tmp_path):
    rc = main(["bestapprox", "--xi1", "1/3", "--xi2", "1/2", "--Q", "6",
               "--out-dir", str(tmp_path), "--no-plot"])
    assert rc == 0
    rows = _csv_rows(tmp_path / "bestapprox.csv")
    assert [r[0] for r in rows[1:]] == ["1", "2", "6"]
    assert all(r[2] != "" for r in rows[1:])
    assert not (tmp_path / "bestapprox.png").exists()


def test_bestapprox_decimal_literal(tmp_path):
    rc = main(["bestapprox", "--xi1", "0.7142857142", "--Q", "50",
               "--out-dir", str(tmp_path), "--no-plot"])
    assert rc == 0
    qs = [r[0] for r in _csv_rows(tmp_path / "bestapprox.csv")[1:]]
    assert "7" in qs


def test_bestapprox_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["bestapprox", "--xi1", "5/7", "--Q", "100",
                     "--out-dir", str(d), "--no-plot"]) == 0
    assert _read_bytes(a / "bestapprox.json") == _read_bytes(b / "bestapprox.json")
    assert _read_bytes(a / "bestapprox.csv") == _read_bytes(b / "bestapprox.csv")


@pytest.mark.parametrize("argv", [
    ["bestapprox", "--Q", "10"],                       # no target at all
    ["bestapprox", "--xi1", "0.5", "--bits", "32"],    # too coarse for decimals
    ["bestapprox", "--xi1", "5/7", "--Q", "0"],
    ["frobnicate"],
    ["witness", "--xi1", "5/7", "--Q", "10"],          # witness needs two coords
    ["construct", "--trace", "t.json", "--steps", "0"],
    ["construct", "--trace", "t.json", "--steps", "1",
     "--phi", "table"],                                # table without knots
])
def test_usage_errors(tmp_path, argv, capsys):
    rc = main(argv + (["--out-dir", str(tmp_path), "--no-plot"]
                      if argv[0] in ("bestapprox", "witness") else []))
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_trace_import_requires_out(trace8, capsys):
    assert main(["trace", "import", str(trace8)]) == 1
    assert "error:" in capsys.readouterr().err


def test_ambiguous_rounding_exit(tmp_path, capsys):
    rc = main(["bestapprox", "--xi1", "0.5", "--bits", "64",
               "--max-bits", "128", "--Q", "10",
               "--out-dir", str(tmp_path), "--no-plot"])
    assert rc == 2
    err = capsys.readouterr().err
    assert "ambiguous" in err and "q = 1" in err


def test_witness_from_trace(tmp_path, trace8):
    rc = main(["witness", "--from-trace", str(trace8), "--Q", "1000",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    rows = _csv_rows(tmp_path / "witness.csv")
    assert rows[0][0] == "pair_index" and len(rows) == 3
    doc = _read_json(tmp_path / "witness.json")
    assert doc["kind"] == "witness-report" and len(doc["records"]) == 2
    png = tmp_path / "witness.png"
    assert png.exists() and png.stat().st_size > 0


def test_construct_fresh_resume_and_noop(tmp_path, phi, capsys):
    t = str(tmp_path / "c.json")
    assert main(["construct", "--trace", t, "--steps", "3", "--no-plot"]) == 0
    state, _ = load_trace(t)
    assert dumps_trace(state) == dumps_trace(run(phi, 3))
    capsys.readouterr()

    assert main(["construct", "--trace", t, "--steps", "4", "--no-plot"]) == 0
    out = capsys.readouterr().out
    assert "resuming" in out and "at 3 completed steps" in out
    state, _ = load_trace(t)
    assert dumps_trace(state) == dumps_trace(run(phi, 4))

    assert main(["construct", "--trace", t, "--steps", "2", "--no-plot"]) == 0
    assert "nothing to do" in capsys.readouterr().out
    state, _ = load_trace(t)
    assert state.step == 6  # a shorter request must not shrink the trace


def test_construct_gauge_mismatch_on_resume(tmp_path, capsys):
    t = str(tmp_path / "c.json")
    assert main(["construct", "--trace", t, "--steps", "1", "--no-plot"]) == 0
    rc = main(["construct", "--trace", t, "--steps", "2", "--no-plot",
               "--phi", "power", "--phi-scale", "2"])
    assert rc == 1
    assert "different gauge" in capsys.readouterr().err


def test_construct_table_gauge(tmp_path, capsys):
    t = str(tmp_path / "c.json")
    rc = main(["construct", "--trace", t, "--steps", "1", "--no-plot",
               "--phi", "table", "--phi-table", "0:1,1:1/2"])
    assert rc == 0
    capsys.readouterr()
    assert main(["trace", "inspect", t]) == 0
    assert '"kind": "table"' in capsys.readouterr().out


def test_construct_search_exhausted(tmp_path, monkeypatch, capsys):
    def boom(state):
        raise SearchExhausted("no viable layer", tested=5)

    monkeypatch.setattr("simdioph.cli.construction_step", boom)
    t = str(tmp_path / "c.json")
    rc = main(["construct", "--trace", t, "--steps", "1", "--no-plot"])
    assert rc == 3
    assert "exhausted after 5 candidates" in capsys.readouterr().err
    assert os.path.exists(t)  # partial progress is kept


def test_corrupt_trace_exits_4(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("nonsense{", encoding="utf-8")
    for argv in (["certify", "--trace", str(bad), "--no-plot",
                  "--out-dir", str(tmp_path)],
                 ["trace", "inspect", str(bad)],
                 ["trace", "import", str(bad), "--out", str(tmp_path / "o.json")],
                 ["construct", "--trace", str(bad), "--steps", "2", "--no-plot"]):
        assert main(argv) == 4, argv
        assert "error:" in capsys.readouterr().err


def test_certify_small_horizon_passes(tmp_path, trace8, capsys):
    rc = main(["certify", "--trace", str(trace8), "--Q", "20",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "overall: PASS" in out
    txt = (tmp_path / "certify_report.txt").read_text(encoding="utf-8")
    assert "overall: PASS" in txt and "window nu=3: 20 q scanned" in txt
    doc = _read_json(tmp_path / "certify_report.json")
    assert doc["overall"] is True and doc["violations"] == []
    assert len(_csv_rows(tmp_path / "certify_scan.csv")) == 21
    png = tmp_path / "certify.png"
    assert png.exists() and png.stat().st_size > 0


def test_certify_full_horizon_reports_violations(tmp_path, trace8, capsys):
    rc = main(["certify", "--trace", str(trace8), "--Q", "10000",
               "--out-dir", str(tmp_path), "--no-plot"])
    assert rc == 5
    assert "overall: FAIL" in capsys.readouterr().out
    doc = _read_json(tmp_path / "certify_report.json")
    assert doc["overall"] is False
    assert len(doc["violations"]) == 5
    assert all(v.startswith("bestapprox-triple-unimodular")
               for v in doc["violations"])
    # both windows scanned in full
    assert len(_csv_rows(tmp_path / "certify_scan.csv")) == 1 + 1453 + 8547


def test_certify_jobs_do_not_change_output(tmp_path, trace8):
    a, b = tmp_path / "a", tmp_path / "b"
    for d, jobs in ((a, "1"), (b, "2")):
        rc = main(["certify", "--trace", str(trace8), "--Q", "100",
                   "--jobs", jobs, "--out-dir", str(d), "--no-plot"])
        assert rc in (0, 5)
    assert _read_bytes(a / "certify_report.json") == \
           _read_bytes(b / "certify_report.json")


def test_trace_export_import_inspect(tmp_path, trace8, capsys):
    rc = main(["trace", "export", str(trace8), "--out-dir", str(tmp_path)])
    assert rc == 0
    rows = _csv_rows(tmp_path / "trace_steps.csv")
    assert len(rows) == 9 and rows[0][0] == "nu"
    png = tmp_path / "trace_growth.png"
    assert png.exists() and png.stat().st_size > 0
    capsys.readouterr()

    copy = tmp_path / "copy.json"
    assert main(["trace", "import", str(trace8), "--out", str(copy)]) == 0
    assert _read_bytes(copy) == _read_bytes(trace8)
    capsys.readouterr()

    assert main(["trace", "inspect", str(trace8)]) == 0
    out = capsys.readouterr().out
    assert "completed steps: 8" in out and "nu=9" in out
