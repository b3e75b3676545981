import csv
import io
import json

import pytest

from ranet.cli import main
from ranet.harness import ExperimentConfig, parse_float_grid, parse_int_grid, run_trials, trial_seeds, metrics_trial


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_grids():
    assert parse_int_grid("2^10, 1e3,7") == (1024, 1000, 7)
    assert parse_float_grid("4:8:0.5") == (4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0)
    assert parse_float_grid("1,2.5") == (1.0, 2.5)
    with pytest.raises(ValueError):
        parse_float_grid("3:1:1")
    assert trial_seeds(5, 3) == [5, 6, 7]


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("metrics", trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig("metrics", fmt="xml")


def test_generate_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "generate", "--n", "200", "--seed", "3", "--out", str(a), "--check")[0] == 0
    assert run(capsys, "generate", "--n", "200", "--seed", "3", "--out", str(b))[0] == 0
    for name in ("ran_n200_s3.trace", "ran_n200_s3.edges", "ran_n200_s3.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_metrics_from_file(tmp_path, capsys):
    run(capsys, "generate", "--n", "4", "--out", str(tmp_path))
    code, out, _ = run(capsys, "metrics", "--input", str(tmp_path / "ran_n4_s0.trace"))
    assert code == 0
    (r,) = rows(out)
    assert (r["diameter"], r["radius"]) == ("1", "1")


def test_metrics_grid_parallel_equals_serial(capsys):
    args = ("metrics", "--n", "300,600", "--trials", "3", "--num-pairs", "500", "--seed", "4")
    code1, serial, _ = run(capsys, *args)
    code2, parallel, _ = run(capsys, *args, "--threads", "2")
    assert code1 == code2 == 0 and serial == parallel
    assert [r["seed"] for r in rows(serial)] == ["4", "5", "6"] * 2


def test_longest_path_json(capsys):
    code, out, _ = run(capsys, "longest-path", "--n", "10", "--method", "brute", "--format", "json")
    assert code == 0
    (doc,) = json.loads(out)
    assert doc["vertex_count"] == len(doc["vertices"])
    code, out, _ = run(capsys, "longest-path", "--n", "10", "--method", "exact", "--format", "json")
    assert json.loads(out)[0]["vertex_count"] == doc["vertex_count"]


def test_longest_path_constructive_all_perms(capsys):
    code, out, _ = run(capsys, "longest-path", "--n", "500", "--method", "constructive", "--perm", "all")
    assert code == 0
    rs = rows(out)
    assert len(rs) == 6 and all(r["bound_ok"] == "True" for r in rs)


def test_bad_arguments_exit_2(capsys):
    assert run(capsys, "longest-path", "--n", "40", "--method", "brute")[0] == 2
    assert run(capsys, "metrics")[0] == 2
    assert run(capsys, "metrics", "--n", "10", "--trials", "0")[0] == 2
    assert run(capsys, "branching", "--t-grid", "1,30", "--trials", "1")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_io_errors_exit_3(tmp_path, capsys):
    assert run(capsys, "metrics", "--input", str(tmp_path / "missing.trace"))[0] == 3
    bad = tmp_path / "bad.trace"
    bad.write_text("garbage\n")
    assert run(capsys, "metrics", "--input", str(bad))[0] == 3


def test_constants(capsys):
    code, out, _ = run(capsys, "constants", "--k-max", "12")
    assert code == 0
    table = {r["name"]: float(r["value"]) for r in rows(out)}
    assert table["c"] == pytest.approx(1.668, abs=1e-3)
    code, out, _ = run(capsys, "constants", "--k-max", "12", "--format", "json")
    assert json.loads(out)["xhat"] == pytest.approx(0.1629562, abs=1e-6)


def test_branching_and_urn_and_zeta(tmp_path, capsys):
    out_file = tmp_path / "b.csv"
    code, _, err = run(capsys, "branching", "--t-grid", "1:3:1", "--trials", "2", "--out", str(out_file))
    assert code == 0 and "slope" in err
    assert len(rows(out_file.read_text())) == 6
    code, out, _ = run(capsys, "urn", "--trials", "500", "--draws", "500")
    assert code == 0 and rows(out)[0]["passed"] == "True"
    code, out, _ = run(capsys, "urn", "--mode", "face-split", "--m", "101", "--trials", "50")
    assert code == 0 and rows(out)[0]["m"] == "101"
    code, out, _ = run(capsys, "zeta-integral", "--zeta", "0.88")
    assert code == 0 and rows(out)[0]["exceeds_one_sixth"] == "True"


def test_run_trials_order():
    res = run_trials(metrics_trial, ([50, 60], [1, 2], [10, 10]), threads=2)
    assert [r["n"] for r in res] == [50, 60]
