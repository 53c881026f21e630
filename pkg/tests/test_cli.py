import csv
import io
import json

import pytest

from conicpencil.cli import CSV_COLUMNS, emit_convergence_table, main
from conicpencil.counting import count_N

from conftest import fixture_path


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_check(capsys):
    assert main(["check", "--pencil", fixture_path("eligible")]) == 0
    rec = _json(capsys)
    assert rec["smooth"] and rec["eligible"] and rec["rho"] == 2


def test_check_split(capsys):
    assert main(["check", "--pencil", fixture_path("split")]) == 0
    rec = _json(capsys)
    assert rec["rho"] == 5 and not rec["eligible"]


def test_missing_file_is_usage_error(capsys, tmp_path):
    assert main(["check", "--pencil", str(tmp_path / "nope.json")]) == 2
    assert "not found" in capsys.readouterr().err


def test_malformed_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"Q0": [[1, 0], [0, 1]]}')
    assert main(["check", "--pencil", str(bad)]) == 2


def test_identities_pass(capsys):
    assert main(["identities", "--pencil", fixture_path("eligible"), "--pmax", "13",
                 "--kmax", "1"]) == 0
    rec = _json(capsys)
    assert rec["failed"] == 0 and rec["checked"] > 0


def test_conic(capsys):
    assert main(["conic", "--matrix", "1,0,0,0,1,0,0,0,-1", "--X", "50"]) == 0
    rec = _json(capsys)
    assert rec["locally_solvable"] and rec["count"] > 0
    assert main(["conic", "--matrix", "1,0,0,0,1,0,0,0,1"]) == 0
    rec = _json(capsys)
    assert not rec["locally_solvable"] and rec["minimal_zero"] is None
    assert main(["conic", "--matrix", "1,2,0,0,1,0,0,0,1"]) == 2


def test_count_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["count", "--pencil", fixture_path("eligible"), "--bmax", "500",
                 "--ladder", "100,500", "--workers", "1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert list(rows[0].keys()) == CSV_COLUMNS
    assert [int(r["B"]) for r in rows] == [100, 500]
    assert all(int(r["N"]) == int(r["N1"]) + int(r["N2"]) for r in rows)


def test_csv_single_rung_and_empty(eligible):
    rep = count_N(eligible, 50, ladder=[50], workers=1)
    text = emit_convergence_table(rep)
    assert text.count("\n") == 2
    rep.B_ladder = []
    with pytest.raises(ValueError):
        emit_convergence_table(rep)


def test_outputs_byte_identical(tmp_path):
    outs = []
    for w in ("1", "2"):
        out = tmp_path / f"r{w}.json"
        main(["count", "--pencil", fixture_path("eligible"), "--bmax", "2000",
              "--workers", w, "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_equidist(capsys):
    assert main(["equidist", "--pencil", fixture_path("eligible"), "--bmax", "300",
                 "--mod", "5", "--a", "1,0,0", "--b", "1,2", "--workers", "1"]) == 0
    rec = _json(capsys)
    assert rec["count"] >= 0 and "varpi" in rec
