import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from oscsum import cli
from oscsum.asymptotics import FourierProfile, z_closed
from oscsum.model import SumParams


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def extrema(y):
    s = np.sign(np.diff(y))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def test_eval_closed_origin():
    code, out, _ = invoke("eval", "--method", "closed", "--A", "0", "--B", "0", "--N", "1e6")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"]["re"] == 1.0 and doc["value"]["im"] == 0.0
    assert doc["method"] == "closed-form"
    assert doc["wall_time_ms"] >= 0


def test_eval_physical_scale():
    code, out, _ = invoke("eval", "--A", "0.5", "--B", "0.3", "--N", "1e23")
    doc = json.loads(out)
    assert code == 0
    assert math.isfinite(doc["value"]["re"]) and doc["value"]["abs"] <= 1 + 1e-6
    assert "error_bound" not in doc


def test_eval_full_beyond_limit_is_validation_error():
    code, out, err = invoke("eval", "--method", "full", "--A", "0.5", "--B", "0.3", "--N", "1e9")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "validation"


@pytest.mark.parametrize("argv", [
    ("eval", "--N", "-3"),
    ("eval", "--method", "bogus"),
    ("eval", "--method", "zs", "--s", "3"),
    ("sweep", "--axis", "A"),
    ("figure",),
    ("eval", "--method", "compare"),
])
def test_validation_errors(argv):
    assert invoke(*argv)[0] == 2


def test_eval_methods_all_run(tmp_path):
    prof = FourierProfile.from_function(lambda p: np.ones_like(p), -0.5, 0.5, 0.25)
    path = tmp_path / "box.json"
    path.write_text(json.dumps(prof.to_json()))
    common = ["--A", "0.4", "--B", "0.2", "--N", "1e4"]
    for method in ("closed", "windowed", "full", "ztilde", "zs"):
        code, out, _ = invoke("eval", "--method", method, *common)
        assert code == 0, method
        assert set(json.loads(out)["value"]) == {"re", "im", "abs", "arg"}
    code, out, _ = invoke("eval", "--method", "zdouble", "--a1", "0.3", "--a2", "0.2", "--b1", "0.1",
                          "--b2", "0.1", "--b3", "0.05", "--N", "1e4")
    assert code == 0
    code, out, _ = invoke("eval", "--method", "stage", *common)
    assert code == 0 and len(json.loads(out)["deltas"]) == 3
    code, out, _ = invoke("eval", "--method", "zf", "--profile", str(path), "--q", "0.2", "--N", "1e6")
    assert code == 0


def test_zf_missing_profile_file_is_io_error(tmp_path):
    code, _, err = invoke("eval", "--method", "zf", "--profile", str(tmp_path / "none.json"))
    assert code == 4 and json.loads(err)["error"] == "io"


def test_compare_examples():
    code, out, _ = invoke("compare", "--A", "0.5", "--B", "0.3", "--N", "1e4")
    doc = json.loads(out)
    assert code == 0
    assert doc["abs_diff"] <= 1e-3
    assert doc["diff_times_N"] == pytest.approx(doc["abs_diff"] * 1e4)
    assert doc["abs_diff"] <= doc["error_budget"]
    _, out, _ = invoke("compare", "--A", "0", "--B", "0", "--N", "1e4", "--method", "windowed")
    assert json.loads(out)["abs_diff"] == pytest.approx(1.8e-5, rel=0.05)
    small = json.loads(invoke("compare", "--A", "2", "--B", "2", "--N", "1e3")[1])["abs_diff"]
    large = json.loads(invoke("compare", "--A", "0.5", "--B", "0.5", "--N", "1e3")[1])["abs_diff"]
    assert small < large


def test_compare_other_families():
    for method in ("ztilde", "zs"):
        doc = json.loads(invoke("compare", "--method", method, "--A", "0.4", "--B", "0.2", "--N", "1e4")[1])
        assert doc["error_budget"] is None
        # zs is accurate to O(N^{s-1}) in absolute terms, i.e. O(1) for s = 1
        assert doc["abs_diff"] < (1 if method == "zs" else 1e-4)


def test_sweep_convergence_study():
    code, out, _ = invoke("sweep", "--method", "compare", "--A", "0.5", "--B", "0.3",
                          "--axis", "N", "--values", "1e3,1e4,1e5,1e6")
    assert code == 0
    header, rows = read_csv(out)
    assert header[:5] == ["N", "re", "im", "abs", "arg"] and "abs_diff" in header
    assert len(rows) == 4
    col = header.index("abs_diff")
    k = np.polyfit(np.log([r[0] for r in rows]), np.log([r[col] for r in rows]), 1)[0]
    assert -1.4 <= k <= -0.6


def test_sweep_range_row_count():
    code, out, _ = invoke("sweep", "--axis", "A", "--values", "0:3:0.1", "--B", "0.3", "--N", "1e3")
    header, rows = read_csv(out)
    assert code == 0 and len(rows) == 31
    assert rows[-1][0] == pytest.approx(3.0)


def test_sweep_threads_byte_identical(monkeypatch):
    argv = ("sweep", "--method", "compare", "--axis", "A", "--values", "0:1:0.25", "--B", "0.3", "--N", "1e3")
    serial = invoke(*argv)[1]
    monkeypatch.setenv("THREADS", "4")
    assert invoke(*argv)[1] == serial


def test_csv_floats_round_trip():
    _, out, _ = invoke("sweep", "--axis", "A", "--values", "0.1,0.7", "--B", "0.3", "--N", "1e23")
    _, rows = read_csv(out)
    for r in rows:
        assert r[1] == z_closed(SumParams(r[0], 0.3, 1e23)).value.real


def test_bounds_reports():
    doc = json.loads(invoke("bounds", "--N", "1e4")[1])
    assert doc["tail_weight_exact"] == pytest.approx(1.8e-5, rel=0.05)
    assert doc["exact_below_bound"] is True
    doc = json.loads(invoke("bounds", "--a", "0")[1])
    row = doc["komatsu"][0]
    assert (row["lower"], round(row["upper"], 4), round(row["truth"], 4)) == (2.0, 2.8284, 2.5066)
    assert row["contained"] and "tail_weight_bound" not in doc
    doc = json.loads(invoke("bounds", "--a-grid", "0:8:0.25")[1])
    assert len(doc["komatsu"]) == 33 and doc["all_contained"] is True


def test_figure_shapes():
    h1, f1 = read_csv(invoke("figure", "--figure", "1")[1])
    assert h1 == ["n", "poisson", "gaussian", "corrected_diff_x1e5"]
    assert (f1[0][0], f1[-1][0]) == (9571, 10429)
    assert extrema([r[3] for r in f1]) == 3
    h2, f2 = read_csv(invoke("figure", "--figure", "2")[1])
    assert h2 == ["n", "d1", "d2_x100"]
    assert extrema([r[1] for r in f2]) == 2
    assert extrema([r[2] for r in f2]) == 3


def test_figure3_small_override():
    # the full-size grid runs in the acceptance suite
    code, out, _ = invoke("figure", "--figure", "3", "--N", "200")
    header, rows = read_csv(out)
    assert code == 0 and header == ["A", "B", "abs_error"] and len(rows) == 31 * 31


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"A": 0.5, "B": 0.3, "N": 1e4, "method": "windowed"}))
    doc = json.loads(invoke("eval", "--config", str(cfg))[1])
    assert doc["params"] == {"A": 0.5, "B": 0.3, "N": 1e4} and doc["method"] == "windowed-sum"
    doc = json.loads(invoke("eval", "--config", str(cfg), "--A", "0.1")[1])
    assert doc["params"]["A"] == 0.1
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert invoke("eval", "--config", str(cfg))[0] == 2
    assert invoke("eval", "--config", str(tmp_path / "missing.json"))[0] == 4


def test_out_file_and_determinism(tmp_path):
    target = tmp_path / "o.json"
    argv = ("compare", "--A", "0.5", "--B", "0.3", "--N", "1e4", "--out", str(target))
    assert invoke(*argv) == (0, "", "")
    first = target.read_bytes()
    invoke(*argv)
    assert target.read_bytes() == first
    assert invoke("bounds", "--N", "1e4", "--out", str(tmp_path / "no" / "dir.json"))[0] == 4


def test_eval_csv_format():
    code, out, _ = invoke("eval", "--A", "0.5", "--B", "0.3", "--N", "1e4", "--format", "csv")
    header = next(csv.reader(io.StringIO(out)))
    assert code == 0 and "value.re" in header


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "oscsum", "eval", "--N", "1e4"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["value"]["re"] == 1.0
