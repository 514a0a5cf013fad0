import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

import oracles as O
from entanglemeter import cli
from entanglemeter.bounds import qn_bound_qubit
from entanglemeter.qstate import PureState, save_state, state_factory, w_vector

DATA = Path(__file__).parent / "data"


def run_capture(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_ghz_q_gme(capsys):
    code, out, _ = run_capture(capsys, "compute", "--state", "ghz:3", "--measure", "q-gme", "--q", "2")
    assert code == 0
    rec = json.loads(out)[0]
    assert abs(rec["value"] - 0.5) < 1e-12 and rec["certified"] is True


def test_compute_k_me_and_alpha(capsys):
    _, out, _ = run_capture(capsys, "compute", "--state", "w:3", "--measure", "alpha-k-me", "--alpha", "0.5", "--k", "3")
    rec = json.loads(out)[0]
    assert rec["measure"] == "alpha-k-ME" and rec["k"] == 3
    assert abs(rec["value"] - (math.sqrt(2 / 3) + math.sqrt(1 / 3) - 1)) < 1e-12


def test_compute_mixed_state_gives_uncertified_roof(capsys):
    code, out, _ = run_capture(capsys, "compute", "--state", "ghz-noise:3:t=0.9", "--measure", "q-k-me",
                               "--q", "2", "--k", "3", "--restarts", "1")
    assert code == 0
    rec = json.loads(out)[0]
    assert rec["certified"] is False
    assert rec["value"] >= qn_bound_qubit(state_factory("ghz_noise", 3, t=0.9), 2).value - 1e-7


def test_compute_from_file(capsys, tmp_path):
    p = tmp_path / "w.json"
    save_state(PureState((2, 2, 2), w_vector(3)), p)
    _, out, _ = run_capture(capsys, "compute", "--state", f"file:{p}", "--q", "3")
    assert abs(json.loads(out)[0]["value"] - (1 - (8 + 1) / 27)) < 1e-12


def test_invalid_file_exits_nonzero(capsys, tmp_path):
    p = tmp_path / "invalid.json"
    p.write_text('{"dims": [2, 2],\n "kind": "pure",\n "data": [[1, 0] [0, 0]]}')
    code, out, err = run_capture(capsys, "compute", "--state", f"file:{p}")
    assert code != 0 and out == ""
    assert "line 3" in err


@pytest.mark.parametrize("argv", [
    ["compute", "--state", "ghz"],
    ["compute", "--state", "ghz:x"],
    ["compute", "--state", "ghz:3:t"],
    ["compute", "--state", "nope:3"],
    ["compute", "--state", "ghz:3", "--q", "1"],
    ["compute", "--state", "ghz-w-noise:3:a=0.8,b=0.8"],
    ["bounds", "--state", "ghz:3", "--bound", "q-bipartite"],
    ["scan", "--state", "ghz-noise:4"],
    ["scan", "--state", "ghz-noise:4", "--grid", "t=0:1"],
    ["detect", "--state", "ghz:3", "--k", "5"],
])
def test_errors_exit_nonzero(capsys, argv):
    code, _, err = run_capture(capsys, *argv)
    assert code == 1 and err.startswith("entanglemeter")


def test_detect_example(capsys):
    code, out, _ = run_capture(capsys, "detect", "--state", "ghz-noise:4:t=0.5", "--k", "2")
    rec = json.loads(out)[0]
    assert code == 0 and rec["ghz_violated"] and not rec["w_violated"]


def test_bounds_csv_and_json(capsys):
    _, out, _ = run_capture(capsys, "bounds", "--state", "w-noise:3:a=0.8")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["name"] for r in rows] == ["qn-qubit", "qn-qudit", "qn-improved", "alpha-n"]
    assert all(r["certified"] == "true" for r in rows)
    _, out, _ = run_capture(capsys, "bounds", "--state", "ghz:2", "--bound", "q-bipartite,wei-bipartite",
                            "--cut", "1|2", "--format", "json")
    rec = json.loads(out)[0]
    assert rec["verdict"].startswith("n-nonseparable")
    assert [b["value"] for b in rec["bounds"]] == pytest.approx([0.75, 0.75])


def test_scan_golden_file(capsys):
    golden = (DATA / "scan_ghz_noise_n4.csv").read_bytes().decode()
    _, out, _ = run_capture(capsys, "scan", "--state", "ghz-noise:4", "--k", "2,3,4", "--grid", "t=0:1:0.01")
    assert out == golden


def test_golden_file_agrees_with_closed_forms():
    rows = list(csv.DictReader((DATA / "scan_ghz_noise_n4.csv").open(newline="")))
    assert len(rows) == 3 * 101
    for r in rows:
        t, k = float(r["param1"]), int(r["k"])
        if t > 0:
            assert abs(float(r["k_eff1"]) - O.example2_keff1(t, 4)) < 1e-12
        if abs(t - O.example2_threshold(4, k)) > 1e-9:
            assert (r["ghz_violated"] == "true") == (t > O.example2_threshold(4, k))


def test_scan_writes_file_and_keeps_grid_order(tmp_path, capsys):
    p = tmp_path / "out.csv"
    code, out, _ = run_capture(capsys, "scan", "--state", "ghz-w-noise:3", "--grid", "a=0:0.9:10",
                               "--grid", "b=0,0.05", "--out", str(p))
    assert code == 0 and out == ""
    rows = list(csv.DictReader(p.open(newline="")))
    assert len(rows) == 20
    assert [(float(r["param1"]), float(r["param2"])) for r in rows[:3]] == [(0, 0), (0, 0.05), (0.1, 0)]


def test_compare_rows(capsys):
    _, out, _ = run_capture(capsys, "compare", "--grid", "theta=0:3.141592653589793:721")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 721
    assert all(abs(float(r["c_q_gme"]) - O.example4_c3_printed(float(r["theta"]))) < 1e-10 for r in rows)


def test_parse_grid_forms():
    assert cli.parse_grid("t=0:1:0.25")[1].tolist() == [0, 0.25, 0.5, 0.75, 1.0]
    assert len(cli.parse_grid("t=0:1:0.01")[1]) == 101
    assert cli.parse_grid("t=0:1:3")[1].tolist() == [0, 0.5, 1]
    assert cli.parse_grid("a=0.1,0.2")[1].tolist() == [0.1, 0.2]
    for bad in ("t", "=1,2", "t=0:1:-1", "t=a,b", "t=0:1:2:3"):
        with pytest.raises(cli.CLIError):
            cli.parse_grid(bad)


def test_emit_formats(tmp_path, capsys):
    assert cli.emit([], "csv", None, ("name", "value", "certified", "params")) == "name,value,certified,params\r\n"
    text = cli.emit([{"name": "x", "value": 1 / 3, "certified": True, "params": '{"q": 2}'}], "csv", None,
                    cli.BOUND_COLUMNS)
    lines = text.split("\r\n")
    assert lines[1] == 'x,0.33333333333333331,true,"{""q"": 2}"'
    assert float(lines[1].split(",")[1]) == 1 / 3
    js = cli.emit([{"v": math.inf, "w": np.float64(0.5)}], "json", str(tmp_path / "o.json"))
    assert json.loads(js) == [{"v": None, "w": 0.5}]
    with pytest.raises(ValueError):
        cli.emit([{"a": 1, "zz": 2}], "csv", None, ("a",))
    with pytest.raises(cli.CLIError):
        cli.emit([{"a": 1}], "csv", str(tmp_path / "missing" / "x.csv"))
    capsys.readouterr()
