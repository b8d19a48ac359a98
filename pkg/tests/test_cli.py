import json

import numpy as np
import pytest

from depthlab.cli import main
from depthlab.cloud import cloud_from_csv


@pytest.fixture
def files(tmp_path):
    (tmp_path / "square.csv").write_text("x1,x2\n1,1\n-1,1\n-1,-1\n1,-1\n")
    (tmp_path / "tri.csv").write_text("x1,x2\n0,0\n1,0\n0,1\n")
    (tmp_path / "model.json").write_text(json.dumps(
        {"mu": [0, 0], "shape": [[1, 0], [0, 1]], "radial": {"kind": "gaussian"}}))
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_depth_square(files, capsys):
    code, out, _ = run(capsys, "depth", "--input", str(files / "square.csv"), "--point", "0,0")
    assert code == 0
    assert out == '{"count":2,"n":4,"depth":0.5}\n'


def test_median_triangle(files, capsys):
    code, out, _ = run(capsys, "median", "--input", str(files / "tri.csv"))
    res = json.loads(out)
    assert code == 0
    assert res["median"] == [0.3333333333333333, 0.3333333333333333]
    assert res["set"]["kind"] == "polygon"


def test_sample_is_byte_identical(files, capsys):
    args = ("sample", "--model", str(files / "model.json"), "--n", "100", "--seed", "7")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b and a.startswith("x1,x2\n")


def test_sample_round_trips_into_region(files, capsys):
    _, text, _ = run(capsys, "sample", "--model", str(files / "model.json"), "--n", "60", "--seed", "1")
    path = files / "s.csv"
    path.write_text(text)
    assert cloud_from_csv(path.read_text()).n == 60
    code, out, _ = run(capsys, "region", "--input", str(path), "--level", "10")
    assert code == 0 and json.loads(out)["level"] == 10
    code, out, _ = run(capsys, "contour", "--input", str(path), "--levels", "5,10,15")
    assert code == 0 and [r["level"] for r in json.loads(out)] == [5, 10, 15]


def test_out_files(files, capsys):
    out_csv = files / "region.csv"
    code, _, _ = run(capsys, "region", "--input", str(files / "square.csv"), "--level", "2",
                     "--out", str(out_csv))
    assert code == 0 and out_csv.read_text().startswith("level,kind,vertex,x,y\n")
    out_json = files / "median.json"
    run(capsys, "median", "--input", str(files / "square.csv"), "--out", str(out_json))
    assert json.loads(out_json.read_text())["level"] == 2
    code, _, err = run(capsys, "median", "--input", str(files / "square.csv"), "--out", "x.txt")
    assert code == 2 and "--out" in err


def test_contaminate(files, capsys):
    _, text, _ = run(capsys, "sample", "--model", str(files / "model.json"), "--n", "50", "--seed", "2")
    (files / "c.csv").write_text(text)
    code, out, _ = run(capsys, "contaminate", "--input", str(files / "c.csv"), "--epsilon", "0.1",
                       "--strategy", "far_cluster", "--radius", "100", "--direction", "0,1", "--seed", "3")
    assert code == 0
    a = cloud_from_csv(text).points
    b = cloud_from_csv(out).points
    assert int(np.any(a != b, axis=1).sum()) == 5


def test_limit_outputs(files, capsys):
    code, out, _ = run(capsys, "limit", "--m", "64", "--radius", "2", "--spacing", "0.5", "--seed", "1")
    s = json.loads(out)
    assert code == 0 and set(s) >= {"argmax", "w_max", "minimizer_angles"}
    path = files / "field.csv"
    run(capsys, "limit", "--m", "64", "--radius", "2", "--spacing", "0.5", "--out", str(path))
    assert path.read_text().startswith("z_x,z_y,w\n")


def test_experiment_files_identical_across_threads(files, capsys):
    cfg = {"kind": "diameter_scaling", "n_grid": [30, 60, 120], "reps": 3, "seed": 5}
    (files / "cfg.json").write_text(json.dumps(cfg))
    outs = []
    for threads in ("1", "2", "1"):
        path = files / f"res{len(outs)}.csv"
        code, _, _ = run(capsys, "experiment", "--config", str(files / "cfg.json"),
                         "--threads", threads, "--out", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_usage_errors(files, capsys):
    assert run(capsys, "depth", "--input", str(files / "square.csv"), "--point", "0,0", "--bogus")[0] == 2
    assert run(capsys, "depth", "--input", str(files / "square.csv"), "--poin", "0,0")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "depth", "--input", str(files / "square.csv"), "--point", "a,b")[0] == 2


def test_runtime_errors(files, capsys):
    bad = files / "bad.csv"
    bad.write_text("x1,x2\n1,2\n3\n")
    code, _, err = run(capsys, "depth", "--input", str(bad), "--point", "0,0")
    assert code == 1 and "line 3" in err
    code, _, err = run(capsys, "depth", "--input", str(files / "square.csv"), "--point", "0,0,0")
    assert code == 1 and "dim" in err
    (files / "cfg.json").write_text(json.dumps({"kind": "diameter_scaling", "n_grid": [3, 2], "reps": 1}))
    assert run(capsys, "experiment", "--config", str(files / "cfg.json"))[0] == 1
    assert run(capsys, "region", "--input", str(files / "square.csv"), "--level", "9")[0] == 1
