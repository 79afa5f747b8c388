import json
import shutil
from pathlib import Path

import pytest

from kpg import cli

DATA = Path(cli.__file__).parent / "data"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_header_is_reproducible(capsys):
    a = run(capsys, "tropical", "q-matrix", str(DATA / "theta.json"))
    b = run(capsys, "tropical", "q-matrix", str(DATA / "theta.json"))
    assert a == b and a[0] == 0
    header = a[1].splitlines()[0]
    assert header.startswith("# kpg ") and "inputs: " in header and "variables: " in header
    assert "[4, -2]" in a[1] and "[-2, 4]" in a[1]


def test_square_generators(capsys):
    code, out, _ = run(capsys, "hirota", "gens", str(DATA / "square.json"), "--format", "ideal")
    assert code == 0
    assert "u1^4 - 4*u1*w1 + 3*v1^2" in out
    code, out, _ = run(capsys, "hirota", "gens", str(DATA / "cube.json"), "--format", "json")
    data = json.loads("\n".join(out.splitlines()[1:]))
    assert len(data["generators"]) == 19


def test_hirota_check(tmp_path, capsys):
    point = tmp_path / "pt.json"
    point.write_text(json.dumps({"a": [1, 1, 1, 1], "u": [1, 0], "v": [1, 0], "w": [2, 0]}))
    code, out, _ = run(capsys, "hirota", "check", str(DATA / "square.json"), "--point", str(point))
    assert code == 1 and "nonzero" in out
    point.write_text(json.dumps({"a": [1, 1, 1], "u": [1, 2], "v": [1, 4], "w": [1, 8]}))
    tri = tmp_path / "tri.json"
    tri.write_text(json.dumps({"g": 2, "points": [[0, 0], [1, 0], [0, 1]]}))
    code, out, _ = run(capsys, "hirota", "check", str(tri), "--point", str(point))
    assert code == 0 and "residual: zero" in out


def test_curve_tau_sigma_g(capsys):
    code, out, _ = run(capsys, "curve", "tau", str(DATA / "f2.json"), "--order", "2")
    assert code == 0 and "sigma coefficients: {(2): 1}" in out


def test_curve_eps_specialization(capsys):
    code, out, _ = run(capsys, "curve", "tau", str(DATA / "f2.json"), "--order", "3", "--eps", "1/2")
    assert code == 0 and "eps" not in out.splitlines()[0].split("variables:")[1]
    code, _, err = run(capsys, "curve", "tau", str(DATA / "f2.json"), "--order", "3", "--eps", "0")
    assert code == 2 and "squarefree" in err


def test_nodal_exit_codes(capsys):
    code, out, _ = run(capsys, "nodal", "solve", str(DATA / "twolines_Dp.json"))
    assert code == 0 and "status: ok" in out
    code, out, _ = run(capsys, "nodal", "solve", str(DATA / "twolines_D2.json"))
    assert code == 3 and "condition: (**)" in out
    code, out, _ = run(capsys, "nodal", "solve", str(DATA / "twolines_D3.json"))
    assert code == 3 and "condition: (*)" in out


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "sato", "tau")[0] == 2
    assert run(capsys, "nodal", "solve", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "tropical", "classify", str(bad))
    assert code == 2 and "invalid JSON" in err
    assert run(capsys, "curve", "tau", str(DATA / "f2.json"), "--order", "-1")[0] == 2


def test_precision_exit_code(tmp_path, capsys):
    frame = tmp_path / "frame.json"
    frame.write_text(json.dumps({"series": [{"start": 0, "coeffs": ["1", "2"], "order": 1}]}))
    code, _, err = run(capsys, "sato", "tau", "--frame", str(frame), "--order", "4")
    assert code == 4 and "insufficient frame precision" in err


def test_soliton_and_grid(tmp_path, capsys):
    code, out, _ = run(capsys, "sato", "soliton", str(DATA / "soliton_1_3.json"), "--check-hirota")
    assert code == 0 and "hirota residual: zero" in out
    out_csv = tmp_path / "g.csv"
    code, out, _ = run(capsys, "nodal", "grid", str(DATA / "soliton_1_2.json"),
                       "--x", "-2:2:0.5", "--y", "0", "--t", "0", "--out", str(out_csv))
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "x,y,t,p" and len(lines) == 10


def test_gallery_passes_and_detects_diffs(tmp_path, capsys, monkeypatch):
    code, out, _ = run(capsys, "gallery")
    assert code == 0, out
    goldens = tmp_path / "goldens"
    shutil.copytree(DATA / "goldens", goldens)
    target = goldens / "tropical-theta.txt"
    target.write_text(target.read_text().replace("[4, -2]", "[5, -2]"))
    code, out, _ = run(capsys, "gallery", "--goldens", str(goldens), "--filter", "tropical")
    assert code == 1 and "FAIL  tropical-theta" in out and "+  [4, -2]" in out
    assert "hirota" not in out


def test_gallery_thread_count_invariant(capsys, monkeypatch):
    monkeypatch.setenv("KPG_THREADS", "1")
    one = run(capsys, "gallery", "--filter", "nodal")
    monkeypatch.setenv("KPG_THREADS", "4")
    four = run(capsys, "gallery", "--filter", "nodal")
    assert one == four


def test_gallery_unknown_filter(capsys):
    assert run(capsys, "gallery", "--filter", "nothing-matches")[0] == 2
