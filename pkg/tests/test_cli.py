import csv
import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from qgmaps.cli import fmt, main, parse_range
from qgmaps.exponents import exponent_set, model_point_from_a
from qgmaps.fixtures import GOLDEN_FILE

GOLDEN = str(resources.files("qgmaps") / "data" / GOLDEN_FILE)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exponents_csv_row(capsys):
    code, out, _ = run(capsys, "exponents", "--a", "1.75", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    expected = exponent_set(model_point_from_a(1.75)).as_dict()
    for key, value in expected.items():
        assert float(rows[0][key]) == value  # 17 digits round-trip exactly
    assert float(rows[0]["dim_surface"]) == 4.0


def test_exponent_grid_json(capsys):
    code, out, _ = run(capsys, "exponents", "--n", "0:2:0.5", "--phase", "dense")
    assert code == 0
    docs = [json.loads(line) for line in out.splitlines()]
    assert [d["n"] for d in docs] == pytest.approx([0, 0.5, 1, 1.5, 2])
    assert all(d["dim_surface"] == pytest.approx(4, abs=1e-12) for d in docs)


def test_compare_grid(capsys):
    code, out, _ = run(capsys, "compare", "--c-grid", "-2:1:0.25")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 13 and list(rows[0]) == ["c", "D1", "D2", "D_H", "measured"]
    assert float(rows[0]["D1"]) == pytest.approx(2, abs=1e-12)
    assert float(rows[0]["D2"]) == pytest.approx(3.5616, abs=1e-4)
    assert rows[-1]["D1"] == "inf" and all(r["D_H"] == "4" for r in rows)


def test_gasket_report(capsys, tmp_path):
    out_map = tmp_path / "g.pmap.json"
    code, out, _ = run(capsys, "gasket", "--in", GOLDEN, "--out", str(out_map))
    assert code == 0
    rep = json.loads(out)
    assert (rep["N0"], rep["N1"], rep["N2"], rep["L"]) == (9, 8, 11, 3)
    assert rep["W_q"] == "q_2^5 q_3 q_5"
    assert rep["gasket_face_degrees"] == {"4": 5, "6": 1, "10": 1}
    assert json.loads(out_map.read_text())["half_edges"] == 44


def test_weights_table(capsys):
    code, out, _ = run(capsys, "weights", "--a", "2.25", "--k-max", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [int(r["k"]) for r in rows] == [1, 2, 3, 4]


def test_sample_outputs_are_deterministic(capsys, tmp_path):
    args = ["sample", "--a", "2.25", "--size-min", "20", "--size-max", "80", "--samples", "4",
            "--seed", "9", "--check"]
    assert run(capsys, *args, "--out", str(tmp_path / "x"), "--threads", "1")[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "y"), "--threads", "3")[0] == 0
    for name in ["index.jsonl"] + [f"sample_{i:05d}.pmap.json" for i in range(4)]:
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    recs = [json.loads(line) for line in (tmp_path / "x" / "index.jsonl").read_text().splitlines()]
    assert all(20 <= r["E"] <= 80 and r["V"] - r["E"] + r["F"] == 2 for r in recs)


def test_sample_decorated(capsys, tmp_path):
    code, _, _ = run(capsys, "sample", "--n", "1", "--phase", "dilute", "--h1", "0.5", "--h2", "0.2",
                     "--size-min", "10", "--size-max", "40", "--samples", "2", "--out", str(tmp_path))
    assert code == 0
    rec = json.loads((tmp_path / "index.jsonl").read_text().splitlines()[0])
    assert rec["max_face_degree"] == 4 and rec["L"] >= rec["holes"]
    code, out, _ = run(capsys, "gasket", "--in", str(tmp_path / rec["file"]))
    assert code == 0 and json.loads(out)["L"] == rec["L"]


def test_measure_roundtrip(capsys, tmp_path):
    code, out, _ = run(capsys, "measure", "--pure", "--sizes", "100,300,1000", "--samples", "20",
                       "--seed", "4", "--threads", "2", "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["method"] for r in rows] == ["FiniteSizeSlope", "BallGrowth"]
    assert list(rows[0]) == ["method", "window", "d_hat", "stderr"]
    code, again, _ = run(capsys, "measure", "--in", str(tmp_path / "samples.jsonl"),
                         "--profiles", str(tmp_path / "profiles.jsonl"))
    assert again == out


def test_validation_errors_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "exponents", "--a", "3")
    assert code == 2 and json.loads(err)["error"] == "OutOfRange"
    bad = tmp_path / "bad.json"
    bad.write_text('{"half_edges": 4, "root": 0, "sigma": [1, 2, 3, 3]}')
    code, _, err = run(capsys, "gasket", "--in", str(bad))
    doc = json.loads(err)
    assert code == 2 and doc["error"] == "ValidationError" and doc["index"] == 3
    code, _, err = run(capsys, "gasket", "--in", str(tmp_path / "missing.json"))
    assert code == 2


def test_usage_errors_exit_64(capsys):
    assert run(capsys, "exponents")[0] == 64
    assert run(capsys, "exponents", "--a", "2", "--n", "1", "--phase", "dense")[0] == 64
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 64
    assert run(capsys, "compare", "--c-grid", "1:0:0.5")[0] == 64


def test_help_texts():
    for cmd in ["exponents", "weights", "sample", "gasket", "measure", "compare"]:
        res = subprocess.run([sys.executable, "-m", "qgmaps.cli", cmd, "--help"],
                             capture_output=True, text=True, check=True)
        assert res.stdout.startswith("usage:") and "Anchor" in res.stdout


def test_helpers():
    assert parse_range("-2:1:0.25")[0] == -2 and len(parse_range("-2:1:0.25")) == 13
    assert parse_range("1,2.5") == [1.0, 2.5]
    assert fmt(0.1) == "0.10000000000000001" and fmt(4) == "4" and fmt(float("inf")) == "inf"
