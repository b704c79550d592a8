from __future__ import annotations

import json

import pytest

from cayleylab.cli import parse_group_spec, run
from cayleylab.errors import ParseError
from cayleylab.groups import Cyclic, DirectProduct, FreeAbelian, FreeGroup, FreeProduct


@pytest.mark.parametrize("text,spec", [
    ("F2", FreeGroup(2)),
    ("F2xZ^1", DirectProduct((FreeGroup(2), FreeAbelian(1)))),
    ("Z/2*Z/3", FreeProduct((Cyclic(2), Cyclic(3)))),
    ("Z/2*Z/3xZ^2", DirectProduct((FreeProduct((Cyclic(2), Cyclic(3))), FreeAbelian(2)))),
    ("Z/2*(Z/3xZ^2)", FreeProduct((Cyclic(2), DirectProduct((Cyclic(3), FreeAbelian(2)))))),
    (" F2 x Z/4 ", DirectProduct((FreeGroup(2), Cyclic(4)))),
])
def test_parse(text, spec):
    assert parse_group_spec(text) == spec


@pytest.mark.parametrize("text,offset", [("F2x", 3), ("Z", 0), ("F2*SL2", 3), ("(F2", 3), ("F2)", 2),
                                         ("F0", 0), ("F2 # ", 3)])
def test_parse_errors_carry_offsets(text, offset):
    with pytest.raises(ParseError) as err:
        parse_group_spec(text)
    assert err.value.offset == offset


def test_unsupported_construct_is_named():
    with pytest.raises(ParseError, match="SL2"):
        parse_group_spec("SL2")


def test_ball_csv(capsys):
    assert run(["ball", "F2", "--gens", "standard", "--r", "10", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1] == "total,118097"


def test_conditions_json(capsys):
    assert run(["conditions", "F3", "--gens", "standard"]) == 0
    reports = {r["condition"]: r for r in json.loads(capsys.readouterr().out)}
    assert reports["GROWTH4"]["verdict"] == "certified-true"
    assert reports["GROWTH4"]["expression_interval"][1] == pytest.approx(0.8944, abs=1e-4)


def test_percolate_records_seed(capsys):
    assert run(["percolate", "F2", "--r", "6", "--p", "0.4", "--trials", "500", "--seed", "7",
                "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "# seed=7" in out
    assert out.splitlines()[-1].startswith("0.4,6,500,")


def test_exit_codes(capsys):
    assert run(["ball", "F2", "--gens", "bogus"]) == 1
    assert run(["ball", "Q8"]) == 1
    assert run(["ball", "F2", "--r", "30", "--max-vertices", "1000"]) == 2
    with pytest.raises(SystemExit) as err:
        run(["nosuch", "F2"])
    assert err.value.code == 1


def test_invariant_violation_exits_3(monkeypatch, capsys):
    from cayleylab import cli
    from cayleylab.errors import InvariantError

    def broken(args, spec, S):
        raise InvariantError("crossed endpoints")

    monkeypatch.setitem(cli.COMMANDS, "ball", broken)
    assert run(["ball", "F2"]) == 3


def test_out_file_and_export(tmp_path, capsys):
    path = tmp_path / "edges.txt"
    assert run(["export-graph", "F2", "--r", "2", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "# group=F2 |S|=4 r=2"
    assert len(lines) == 17


@pytest.mark.parametrize("argv", [
    ["growth", "F2", "--kmax", "5", "--format", "csv"],
    ["rho", "F2", "--horizon", "6"],
    ["conductance", "Z^2", "--r", "3", "--format", "csv"],
    ["pc", "F2", "--r", "6", "--trials", "300"],
    ["scan-sk", "F3", "--kmax", "2", "--format", "csv"],
    ["scan-lift", "F2xZ^1", "--horizon", "4"],
    ["ball", "F2xZ^1", "--gens", "lift:2", "--r", "1"],
    ["ball", "F2", "--gens", "pow:2", "--r", "2"],
])
def test_every_subcommand_runs(argv, capsys):
    assert run(argv) == 0
    assert capsys.readouterr().out
