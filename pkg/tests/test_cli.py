import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from bilevelcut.frontend.bench import read_records, rel_gap, run_manifest, write_records
from bilevelcut.frontend.cli import main

DATA = Path(__file__).parent / "data"


def test_solve_mps(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert main(["solve", str(DATA / "moore_bard.mps"), "--branch", "link", "--cuts", "idic,isic1",
                 "--ic-strategy", "XYInt", "--tailoff", "0.1", "--json-out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "objective -22" in text
    res = json.loads(out.read_text())
    assert res["value"] == -22 and res["x"] == [2.0] and res["y"] == [2.0]


def test_gen_oracle_check(capsys, tmp_path):
    f = tmp_path / "i.json"
    assert main(["gen", "knapsack_interdiction", "--seed", "3", "--size", '{"k": 3}', "--out", str(f)]) == 0
    assert main(["oracle", str(f)]) == 0
    assert "objective" in capsys.readouterr().out
    assert main(["check", str(DATA / "moore_bard.mps"), "--point", "2,2"]) == 0
    assert main(["check", str(DATA / "moore_bard.mps"), "--point", "2,4"]) == 1
    assert "violates_2c" in capsys.readouterr().out


def test_errors_are_reported(capsys, tmp_path):
    assert main(["solve", str(tmp_path / "missing.json")]) == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["solve", str(DATA / "moore_bard.mps"), "--cuts", "bogus"])


def test_bench_and_profile(tmp_path):
    manifest = {
        "time_limit": 30,
        "instances": [{"family": "den_like", "seed": s, "size": {"bound": 4}} for s in range(3)]
        + [str(DATA / "moore_bard.mps")],
        "configs": [{"bundle": "none", "name": "none"}, {"bundle": "default", "name": "default"},
                    {"cuts": ["idic"], "ic_strategy": {"idic": "Always"}, "name": "idic"}],
    }
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps(manifest))
    recs = tmp_path / "rec.csv"
    assert main(["bench", str(mpath), "--out", str(recs), "--jobs", "2"]) == 0
    rows = read_records(recs)
    assert len(rows) == 12
    vals = {}
    for r in rows:
        assert r.status == "optimal"
        vals.setdefault(r.instance, set()).add(r.value)
    assert all(len(v) == 1 for v in vals.values())
    assert vals["moore_bard"] == {-22.0}
    prof = tmp_path / "p.csv"
    assert main(["profile", str(recs), "--kind", "baseline", "--baseline", "none", "--measure", "nodes",
                 "--min-time-all", "0", "--min-time-any", "0", "--out", str(prof)]) == 0
    with open(prof, newline="") as fh:
        table = list(csv.DictReader(fh))
    assert table[0].keys() == {"kind", "config", "side", "x", "fraction"}
    assert [r for r in table if r["config"] == "none"] == [
        {"kind": "baseline", "config": "none", "side": "nodes", "x": "1.0", "fraction": "1.0"}]
    assert prof.read_bytes().count(b"\r") == 0


def test_records_round_trip(tmp_path):
    recs = run_manifest({"instances": [{"family": "den_like", "seed": 1, "size": {"bound": 3}}],
                         "configs": [{"bundle": "pure_integer"}]})
    write_records(recs, tmp_path / "r.csv")
    back = read_records(tmp_path / "r.csv")
    assert back[0].instance == recs[0].instance and back[0].nodes == recs[0].nodes
    assert back[0].stats == json.loads(json.dumps(recs[0].stats))


def test_gap_definition():
    assert rel_gap(-22, -42) == pytest.approx(20 / 22)
    assert rel_gap(0.5, 0.0) == pytest.approx(0.5)
    assert rel_gap(float("inf"), 0) == float("inf")


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "bilevelcut.frontend.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "solve" in r.stdout
