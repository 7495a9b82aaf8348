import json
import re

import pytest

from product_ensemble.cli import fmt, read_table, run


def _run(tmp_path, name, *args):
    out = tmp_path / name
    code = run([*args, "--out", str(out)])
    return code, out


def test_density_rows(tmp_path):
    code, out = _run(tmp_path, "d.csv", "density", "--M", "2")
    assert code == 0
    head, recs = read_table(out)
    assert head.startswith("# product_ensemble")
    assert len(recs) == 200
    xs = [float(r["x"]) for r in recs]
    assert xs == sorted(xs)


def test_bulk_table(tmp_path):
    code, out = _run(tmp_path, "b.csv", "bulk", "--M", "2", "--n", "40", "--x0", "1.0")
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 83
    assert lines[1] == "xi,eta,rescaled_K,sine_K,abs_err"


def test_oracle_json(tmp_path):
    code, out = _run(tmp_path, "o.json", "oracle", "--M", "2", "--n", "3")
    assert code == 0
    _, recs = read_table(out)
    rec = recs[0]
    assert rec["det_check"] == "pass"
    assert rec["oracle_vs_contour_max_rel_err"] < 1e-8
    assert rec["reproducing_defect"] < 1e-4


def test_exit_codes(tmp_path, capsys):
    assert run(["density", "--model", "bogus"]) == 2
    assert run(["kernel", "--x-grid", "1:2"]) == 2
    assert run(["bulk", "--n", "10"]) == 2
    assert run(["edge", "--model", "inverses", "--M", "2", "--K", "1", "--n", "20"]) == 2
    assert run(["oracle", "--n", "3", "--model", "truncated", "--kappa", "2"]) == 2
    assert run(["kernel", "--n", "3", "--tol", "1e-30"]) == 3


def test_reruns_identical(tmp_path):
    args = ("kernel", "--M", "2", "--n", "5", "--x-grid", "0.5:3:4")
    _, a = _run(tmp_path, "a.csv", *args)
    _, b = _run(tmp_path, "b.csv", *args)
    assert a.read_bytes() == b.read_bytes()
    args = ("sample", "--n", "20", "--trials", "5", "--seed", "3", "--output", "values")
    _, a = _run(tmp_path, "a.csv", *args)
    _, b = _run(tmp_path, "b.csv", *args)
    assert a.read_bytes() == b.read_bytes()


def test_seventeen_digits(tmp_path):
    assert fmt(0.1) == "0.10000000000000001"
    assert float(fmt(1 / 3)) == 1 / 3
    _, out = _run(tmp_path, "k.csv", "kernel", "--n", "3", "--x-grid", "0.5:1.5:2")
    _, recs = read_table(out)
    for r in recs:
        digits = re.sub(r"[^0-9]", "", r["K"].split("e")[0]).lstrip("0")
        assert len(digits) >= 15


def test_negative_grid_and_config_header(tmp_path):
    code, out = _run(tmp_path, "e.json", "edge", "--M", "2", "--n", "30",
                     "--xi-grid", "-1:0:2", "--format", "json")
    assert code == 0
    head, recs = read_table(out)
    cfg = json.loads(head.split(" ", 3)[3])
    assert cfg["xi_grid"] == {"lo": -1.0, "hi": 0.0, "count": 2}
    assert len(recs) == 4


def test_failed_run_leaves_no_file(tmp_path):
    out = tmp_path / "x.csv"
    assert run(["bulk", "--n", "10", "--out", str(out)]) == 2
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []
