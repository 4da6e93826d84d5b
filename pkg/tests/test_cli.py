from __future__ import annotations

import csv
import io
import json

import pytest

from graphcodes import cli


def run_cli(capsys, *argv):
    rc = cli.main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_toric_distance(capsys):
    rc, out, _ = run_cli(capsys, "run", "toric-distance", "L=3")
    assert rc == 0
    assert rows(out) == [["L", "ell", "N", "d_X", "d_Z"], ["3", "1", "18", "3", "3"]]


def test_column_model_closed_form(capsys):
    rc, out, _ = run_cli(capsys, "column-model", "T=3", "d=2", "p=0.1")
    assert rc == 0
    assert float(rows(out)[1][4]) == pytest.approx(0.085536, abs=1e-9)


def test_ising_exact(capsys):
    rc, out, _ = run_cli(capsys, "run", "ising-toy", "N=3", "T=2", "p=0.1", "trials=0")
    assert rc == 0
    row = dict(zip(*rows(out)))
    assert row["method"] == "exact"
    assert float(row["failure"]) == pytest.approx(0.085536, abs=1e-9)


@pytest.mark.parametrize("argv", [
    ("decode-sim", "graph=cycle", "decoder=mc", "trials=25000"),
    ("ising-toy", "trials=300"),
    ("chainmap-demo", "code=steane", "w=random", "trials=5"),
    ("isg-trace", "fixture=honeycomb_2x2", "rounds=2"),
])
def test_same_seed_same_bytes(capsys, argv):
    _, first, _ = run_cli(capsys, "--seed", "11", *argv)
    _, second, _ = run_cli(capsys, "--seed", "11", *argv)
    assert first == second and first.count("\n") >= 2


def test_seed_changes_sampled_output(capsys):
    _, a, _ = run_cli(capsys, "--seed", "1", "decode-sim", "graph=cycle", "decoder=mc", "trials=20000", "p=0.2")
    _, b, _ = run_cli(capsys, "--seed", "2", "decode-sim", "graph=cycle", "decoder=mc", "trials=20000", "p=0.2")
    assert a != b


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "params.txt"
    cfg.write_text("# torus\nL=2\nell=3\n")
    out_path = tmp_path / "out.csv"
    rc, out, _ = run_cli(capsys, "--experiment", "toric-distance", "--config", str(cfg), "--out", str(out_path), "ell=2")
    assert rc == 0 and out == ""
    assert rows(out_path.read_text())[1] == ["2", "2", "16", "4", "2"]


def test_list_catalog(capsys):
    rc, out, _ = run_cli(capsys, "list")
    catalog = json.loads(out)
    assert rc == 0
    assert set(catalog) == set(cli.EXPERIMENTS)
    assert catalog["toric-distance"]["columns"] == ["L", "ell", "N", "d_X", "d_Z"]


@pytest.mark.parametrize("name", sorted(cli.EXPERIMENTS))
def test_schema_round_trip(name):
    raw = cli.parse_assignments(cli.schema_text(name).splitlines())
    config = cli.build_config(name, raw)
    assert config.params == {k: v.default for k, v in cli.EXPERIMENTS[name].params.items()}


@pytest.mark.parametrize("argv", [
    ("nope",),
    ("toric-distance", "bogus=1"),
    ("toric-distance", "L=abc"),
    ("toric-distance", "notanassignment"),
    ("decode-sim", "graph=star", "decoder=magic"),
    ("decode-sim", "graph=cycle", "decoder=two-step"),
    ("ising-toy", "vacancies=x"),
    ("ising-toy", "trials=-1"),
    ("--config", "/nonexistent/params.txt", "toric-distance"),
    (),
])
def test_errors_exit_with_status_two(capsys, argv):
    rc, out, err = run_cli(capsys, *argv)
    assert rc == 2
    assert out == "" and "error" in err
