from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from freeprob.cli import (
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_USAGE,
    main,
    parse_complex,
    parse_grid,
    parse_points,
    premerge_negative_values,
    run,
)

SMALL_GRID = ["--grid", "0.01,100,6,16"]


def test_parse_complex_forms():
    assert parse_complex("2i") == 2j
    assert parse_complex("-1i") == -1j
    assert parse_complex("i") == 1j
    assert parse_complex("1.1-0.1i") == 1.1 - 0.1j
    assert parse_complex("3") == 3


def test_parse_points_range_and_list():
    assert parse_points("-1:1:0.5", real=True) == [-1, -0.5, 0, 0.5, 1]
    assert parse_points("0,2.5", real=True) == [0, 2.5]
    assert parse_points("1i,2-1i", real=False) == [1j, 2 - 1j]


def test_parse_grid():
    assert parse_grid("0.01,100,6,16") == (0.01, 100, 6, 16)


def test_negative_values_are_merged():
    assert premerge_negative_values(["--c", "-0.5"]) == ["--c=-0.5"]


def test_check_pass_and_fail_exit_codes():
    status, _ = run(["check", "--fsd", "--catalog", "semicircle", *SMALL_GRID])
    assert status == EXIT_PASS
    status, text = run(["check", "--fsd", "--catalog", "free_poisson", "--lambda", "1", *SMALL_GRID])
    assert status == EXIT_FAIL
    doc = json.loads(text)
    assert doc["verdict"] == "fail" and doc["checks"][0]["witness"] is not None


def test_check_json_is_reproducible():
    argv = ["check", "--fsd", "--catalog", "free_meixner", "--a", "2", "--b", "1/2",
            "--routes", "grid,hankel,levy", *SMALL_GRID]
    a, b = run(argv)[1], run(argv)[1]
    assert a == b
    doc = json.loads(a)
    assert doc["schema"] == 1
    assert doc["config"]["params"] == {"a": 2, "b": "1/2"}
    assert [c["verdict"] for c in doc["checks"]] == ["fail", "fail", "fail"]


def test_awk_route_with_negative_parameter():
    status, text = run(["check", "--catalog", "awk", "--c", "-0.5", "--routes", "awk"])
    assert status == EXIT_PASS
    assert json.loads(text)["checks"][0]["check"].startswith("awk")


@pytest.mark.parametrize("argv", [
    ["check", "--catalog", "no_such_measure"],
    ["cumulants", "--catalog", "free_gamma"],
    ["check", "--catalog", "semicircle", "--tol", "0.5"],
    ["check", "--catalog", "semicircle", "--routes", "magic"],
    ["transform", "--catalog", "semicircle", "--op", "cauchy"],
    ["check", "--cat", "semicircle"],
    ["frobnicate"],
])
def test_usage_errors_exit_three(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert capsys.readouterr().err


def test_cumulants_output():
    status, text = run(["cumulants", "--catalog", "gaussian", "--order", "6"])
    assert status == EXIT_PASS
    doc = json.loads(text)
    assert doc["free_cumulants"] == ["0", "1", "0", "1", "0", "4"]


def test_density_csv():
    status, text = run(["density", "--catalog", "semicircle", "--points", "-1:1:1", "--format", "csv"])
    assert status == EXIT_PASS
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["t"] for r in rows] == ["-1", "0", "1"]
    assert float(rows[1]["value"]) == pytest.approx(1 / 3.141592653589793, abs=1e-9)


def test_transform_csv_columns():
    status, text = run(["transform", "--catalog", "semicircle", "--op", "cprime",
                        "--point", "-1i", "--format", "csv"])
    assert status == EXIT_PASS
    row = next(csv.DictReader(io.StringIO(text)))
    assert set(row) == {"point_re", "point_im", "value_re", "value_im", "est_error", "method"}
    assert float(row["value_im"]) == pytest.approx(-2, abs=1e-9)


def test_check_csv_has_one_row_per_point():
    status, text = run(["check", "--catalog", "semicircle", *SMALL_GRID, "--format", "csv"])
    lines = text.strip().splitlines()
    assert lines[0] == "check,point_re,point_im,value_re,value_im,failed"
    assert len(lines) == 1 + 25 * 16


def test_input_json_and_record(tmp_path):
    js = tmp_path / "m.json"
    js.write_text(json.dumps({"name": "two-point",
                              "representations": [{"type": "atoms", "atoms": [["-1", "1/2"], ["1", "1/2"]]}]}))
    status, text = run(["cumulants", "--input", str(js), "--order", "4"])
    assert json.loads(text)["free_cumulants"] == ["0", "1", "0", "-1"]
    rec = tmp_path / "m.cfg"
    rec.write_text("name = free_poisson\nlambda = 1\n")
    status, text = run(["cumulants", "--input", str(rec), "--order", "3"])
    assert json.loads(text)["free_cumulants"] == ["1", "1", "1"]


def test_output_file(tmp_path):
    out = tmp_path / "o.json"
    assert main(["cumulants", "--catalog", "semicircle", "--order", "2", "--out", str(out)]) == EXIT_PASS
    assert json.loads(out.read_text())["free_cumulants"] == ["0", "1"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "freeprob", "transform", "--catalog", "student_t3",
                           "--op", "cauchy", "--point", "2i"], capture_output=True, text=True)
    assert proc.returncode == 0
    val = json.loads(proc.stdout)["rows"][0]["value"]
    assert val["im"] == pytest.approx(-0.392304845413, abs=1e-10)
