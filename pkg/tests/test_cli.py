from __future__ import annotations

import csv
import io
import json
import math

import pytest

from quasiprufer import find_eigenvalue, make_problem
from quasiprufer.cli import run


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture()
def base_cfg(tmp_path):
    return write(tmp_path, "base.json", {"a": 0, "b": "pi", "p": "1", "s": "0", "q": "0", "omega": "1"})


@pytest.fixture()
def shift_cfg(tmp_path):
    return write(tmp_path, "shift.json", {"a": 0, "b": "pi", "p": 1, "s": 1, "q": 0, "form": "linear-B"})


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_solve_csv(base_cfg, capsys):
    assert run(["solve", "--config", base_cfg, "--n", "4", "--format", "csv"]) == 0
    out = rows(capsys.readouterr().out)
    assert [int(r["n"]) for r in out] == [1, 2, 3, 4]
    assert [float(r["lambda"]) for r in out] == pytest.approx([1, 4, 9, 16], abs=1e-8)
    assert all(r["error"] == "" for r in out)
    assert float(out[3]["equation_residual"]) < 1e-5


def test_solve_table_default(base_cfg, capsys):
    assert run(["solve", "--config", base_cfg, "--n", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[:2] == ["n", "lambda"]
    assert len(lines) == 4


def test_phase_csv(base_cfg, capsys):
    assert run(["phase", "--config", base_cfg, "--lambda", "1"]) == 0
    out = rows(capsys.readouterr().out)
    assert len(out) == 1000
    assert list(out[0]) == ["x", "theta", "r", "y", "u"]
    assert float(out[-1]["theta"]) == pytest.approx(-math.pi, abs=1e-8)
    assert float(out[-1]["x"]) == math.pi


def test_csv_uses_seventeen_digits(base_cfg, capsys):
    run(["phase", "--config", base_cfg, "--lambda", "1"])
    x = rows(capsys.readouterr().out)[-1]["x"]
    assert x == "3.1415926535897931"


def test_zeros_long_table(base_cfg, capsys):
    assert run(["zeros", "--config", base_cfg, "--lambda", "4,9"]) == 0
    out = rows(capsys.readouterr().out)
    assert [(float(r["lambda"]), int(r["k"])) for r in out] == [(4, 1), (4, 2), (9, 1), (9, 2), (9, 3)]
    assert float(out[0]["x"]) == pytest.approx(math.pi / 2, abs=1e-9)


def test_bounds_json(shift_cfg, capsys):
    assert run(["bounds", "--config", shift_cfg, "--n", "1", "--format", "json"]) == 0
    (res,) = json.loads(capsys.readouterr().out)
    assert res["upper"] == pytest.approx(2.0, rel=1e-12)
    assert 2.0 - 1e-5 < res["lower"] < 2.0


def test_oracle_json(shift_cfg, capsys):
    assert run(["oracle", "--config", shift_cfg, "--n", "2", "--mesh", "500"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["meshes"] == [500, 1000]
    assert res["extrapolated"] == pytest.approx([2.0, 5.0], abs=1e-6)
    assert 1.8 < res["order"] < 2.2


def test_compare_json(tmp_path, capsys):
    cfg = write(tmp_path, "pair.json", {"a": 0, "b": 5, "p": 1, "s": "x", "q": 0, "q2": 1})
    assert run(["compare", "--config", cfg, "--lambda", "0"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["verdict"] is True
    assert res["count_zeros_2"] >= res["count_zeros_1"]
    assert "witnesses" in res


def test_residual_json(shift_cfg, capsys):
    assert run(["residual", "--config", shift_cfg, "--lambda", "2,5"]) == 0
    res = json.loads(capsys.readouterr().out)["residuals"]
    assert [r["form"] for r in res] == ["linear-B", "linear-B"]
    assert all(r["max_residual"] < 1e-5 for r in res)


def test_json_round_trips_bit_for_bit(base_cfg, tmp_path):
    out = tmp_path / "solve.json"
    assert run(["solve", "--config", base_cfg, "--n", "3", "--format", "json", "--out", str(out)]) == 0
    first = json.loads(out.read_text())
    again = json.dumps(first, indent=2) + "\n"
    assert again == out.read_text()
    assert all(type(r["lambda"]) is float for r in first)


def test_config_values_and_flag_overrides(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"a": 0, "b": "pi", "p": 1, "s": 0, "q": 0, "n": 1, "format": "csv",
                                      "tol": {"abs": 1e-10, "rel": 1e-10}})
    assert run(["solve", "--config", cfg]) == 0
    assert len(rows(capsys.readouterr().out)) == 1
    assert run(["solve", "--config", cfg, "--n", "2", "--tol-abs", "1e-9"]) == 0
    assert len(rows(capsys.readouterr().out)) == 2


def test_partial_failures_keep_exit_zero(tmp_path, capsys, monkeypatch):
    from quasiprufer import cli

    cfg = write(tmp_path, "blow.json", {"a": 0, "b": 5, "p": 1, "s": "x", "q": 0, "theta0": "pi"})
    # a search window that must expand through the blow-up region
    original = cli.eigenvalues_up_to
    monkeypatch.setattr(
        cli, "eigenvalues_up_to", lambda prob, N, tol: original(prob, N, tol=tol, search=(-400.0, -300.0, 4.0))
    )
    assert run(["solve", "--config", cfg, "--n", "2", "--format", "csv"]) == 0
    out = rows(capsys.readouterr().out)
    assert len(out) == 2 and all(r["error"] for r in out)


@pytest.mark.parametrize(
    "data, argv, fragment",
    [
        ({"a": 0, "b": 1, "p": "-1", "s": 0, "q": 0}, ["solve"], "p must be positive"),
        ({"a": 1, "b": 0, "p": 1, "s": 0, "q": 0}, ["solve"], "interval"),
        ({"a": 0, "b": 1, "p": "1+", "s": 0, "q": 0}, ["solve"], "position"),
        ({"a": 0, "b": 1, "p": 1, "s": 0, "q": 0}, ["phase"], "--lambda"),
        ({"a": 0, "b": 1, "p": 1, "s": 0, "q": 0}, ["solve", "--tol-abs", "1"], "tolerances"),
        ({"a": 0, "b": 1, "p": 1, "s": 0, "q": 0, "n": "x"}, ["solve"], "bad config value"),
        ({"a": 0, "b": 1, "p": 1, "s": 0, "q": 0}, ["compare", "--lambda", "0"], "q2"),
    ],
)
def test_config_errors_exit_two(tmp_path, capsys, data, argv, fragment):
    cfg = write(tmp_path, "bad.json", data)
    assert run([argv[0], "--config", cfg, *argv[1:]]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("E_CONFIG: ")
    assert fragment in err[0]


def test_missing_and_malformed_config(tmp_path, capsys):
    assert run(["solve", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["solve", "--config", str(bad)]) == 2
    assert capsys.readouterr().err.count("E_CONFIG") == 2


def test_numeric_failure_exits_three(tmp_path, capsys):
    cfg = write(tmp_path, "blow.json", {"a": 0, "b": 5, "p": 1, "s": "x", "q": 0, "theta0": "pi"})
    assert run(["phase", "--config", cfg, "--lambda", "-30"]) == 3
    err = capsys.readouterr().err.strip()
    assert err.startswith("E_NUMERIC: ") and "blow-up" in err


def test_table_file_relative_to_config(tmp_path, capsys):
    (tmp_path / "p.csv").write_text("x,value\n" + "\n".join(f"{i / 10},{1 + i / 10}" for i in range(11)))
    cfg = write(tmp_path, "t.json", {"a": 0, "b": 1, "p": {"table": "p.csv"}, "s": 0, "q": 0, "form": "linear-B"})
    assert run(["solve", "--config", cfg, "--n", "1", "--format", "json"]) == 0
    (res,) = json.loads(capsys.readouterr().out)
    # monotone cubic through samples of 1 + x reproduces the line exactly
    exact = find_eigenvalue(make_problem(0, 1, p="1+x", form="linear-B"), 1).lam
    assert res["lambda"] == pytest.approx(exact, abs=1e-8)
