import csv
import json
from fractions import Fraction as F

import jsonschema
import pytest

from cesaro_kothe import cli, kernel, report
from cesaro_kothe.criteria import Status
from cesaro_kothe.exact import GaussianRational as G


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_nuclear_example(capsys):
    code, out, _ = run(capsys, "check", "--family", "nuclear-g1-example", "--props", "g1,nuclear,invertibility")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, report.REPORT_SCHEMA)
    status = {e["criterion"]: e["status"] for e in rep["entries"]}
    assert status["nuclearity"] == "Holds"


def test_check_alpha_seq_fails_at_first_row(capsys):
    code, out, _ = run(capsys, "check", "--family", "alpha-seq", "--alpha", "0.9", "--props", "invertibility")
    assert code == 1
    entry = json.loads(out)["entries"][0]
    assert entry["status"] == "Fails" and entry["counterexample"]["n"] == 1


def test_check_bad_expression(capsys):
    code, out, err = run(capsys, "check", "--family", '{log_weight_expr: "i^"}')
    assert code == 3 and out == ""
    assert "offset 2" in err and "i^\n  ^" in err


def test_check_inconclusive_exit(capsys):
    code, _, _ = run(capsys, "check", "--family", "sn-gap", "--props", "vanishing", "-q")
    assert code == 2


def test_check_writes_report_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "check", "--family", "power-series", "--props", "regular,sn",
                       "-N", "512", "-o", str(target), "-q")
    assert code == 0 and out == ""
    rep = json.loads(target.read_text())
    jsonschema.validate(rep, report.REPORT_SCHEMA)
    assert "sn" in rep and rep["config"]["N"] == 512


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('family = "point-spectrum"\nN = 256\nprops = "kothe"\n[params]\ns = 2\n')
    code, out, _ = run(capsys, "check", "--config", str(cfg), "-N", "300", "-q")
    rep = json.loads(out)
    assert code == 0
    assert rep["config"]["N"] == 300
    assert rep["config"]["family"]["params"]["s"] == 2
    cfg_json = tmp_path / "run.json"
    cfg_json.write_text(json.dumps({"family": "power-series", "props": "kothe", "N": 128}))
    code, out, _ = run(capsys, "check", "--config", str(cfg_json), "-q")
    assert code == 0 and json.loads(out)["config"]["N"] == 128


def test_usage_errors(capsys):
    assert run(capsys, "check", "--family", "nope")[0] == 3
    assert run(capsys, "check", "--family", "power-series", "--props", "magic")[0] == 3
    assert run(capsys, "check", "--family", "power-series", "--param", "beta=2")[0] == 3
    assert run(capsys, "check", "--family", "power-series", "--config", "/nonexistent.toml")[0] == 3
    assert run(capsys, "check")[0] == 3
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 3


def test_thread_env(monkeypatch, capsys):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    code, out, _ = run(capsys, "check", "--family", "power-series", "--props", "kothe,regular", "-N", "256", "-q")
    assert code == 0 and len(json.loads(out)["entries"]) == 2
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    assert run(capsys, "check", "--family", "power-series", "--props", "kothe", "-N", "256")[0] == 3


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--family", "power-series", "--k-max", "20")
    region = json.loads(out)["region"]
    assert code == 0
    assert region["classification"] == "Nuclear"
    assert region["sigma_points"] == ["1"] + [f"1/{k}" for k in range(2, 21)]


def test_spectrum_grid_csv(tmp_path, capsys):
    target = tmp_path / "grid.csv"
    code, _, _ = run(capsys, "spectrum", "--family", "point-spectrum", "--lambda-grid=-0.5:1:4,-0.5:0.5:3",
                     "--csv", str(target), "-N", "2048")
    rows = list(csv.DictReader(target.open()))
    assert code == 0 and len(rows) == 12
    assert {r["classification"] for r in rows} <= {"spectrum", "undetermined", "resolvent"}


def test_resolvent_round_trip(tmp_path, capsys):
    rhs = tmp_path / "e1.csv"
    kernel.write_vector_csv(kernel.SequenceVector.unit(1, 200), rhs)
    sol = tmp_path / "x.csv"
    code, out, _ = run(capsys, "resolvent", "--family", "power-series", "--lambda", "0.4+0.3i",
                       "--rhs", str(rhs), "--solution", str(sol))
    res = json.loads(out)["resolvent"]
    assert code == 0 and res["residual"] <= 1e-10 and res["alpha"] == pytest.approx(1.6)
    x = kernel.read_vector_csv(sol)
    assert x.N == 200 and x.at(1) == pytest.approx(1 / (1 - (0.4 + 0.3j)))


def test_resolvent_exact(capsys):
    code, out, _ = run(capsys, "resolvent", "--lambda", "3/7", "--rhs", "e1", "-N", "30", "--exact")
    assert code == 0 and json.loads(out)["resolvent"]["residual"] == 0


@pytest.mark.parametrize("lam,nearest", [("0.5", "1/2"), ("1/3", "1/3"), ("0", "0"), ("1", "1/1")])
def test_resolvent_on_sigma(capsys, lam, nearest):
    code, _, err = run(capsys, "resolvent", "--lambda", lam)
    assert code == 3 and f"nearest excluded point is {nearest}" in err


def test_resolvent_bad_literal(capsys):
    code, _, err = run(capsys, "resolvent", "--lambda", "0.4+0.3x")
    assert code == 3 and "offset 7" in err


def test_ergodic(tmp_path, capsys):
    target = tmp_path / "means.csv"
    code, out, _ = run(capsys, "ergodic", "--family", "power-series", "--x", "e1", "--x", "ones",
                       "--k-schedule", "1,10,100,1000", "--csv", str(target))
    runs = json.loads(out)["runs"]
    assert code == 0 and [r["status"] for r in runs] == ["Holds", "Holds"]
    rows = list(csv.DictReader(target.open()))
    assert len(rows) == 8 and all(float(r["value"]) == 0 for r in rows if r["x"] == "ones")


def test_oracle_and_families(capsys):
    code, out, _ = run(capsys, "oracle", "-N", "10")
    assert code == 0 and json.loads(out)["oracle"]["passed"]
    assert run(capsys, "oracle", "-N", "99")[0] == 3
    code, out, _ = run(capsys, "families")
    fams = json.loads(out)["families"]
    assert code == 0 and len(fams) == 6 and all(f["anchor"] for f in fams)


# --- literals and exit codes ----------------------------------------------------------------

@pytest.mark.parametrize("text,value", [
    ("2", F(2)),
    ("3/7", F(3, 7)),
    ("-0.25", F(-1, 4)),
    ("0.4+0.3i", G(F(2, 5), F(3, 10))),
    ("1-2i", G(1, -2)),
    ("i", G(0, 1)),
    ("-i", G(0, -1)),
    ("2.5e-1", F(1, 4)),
    (" 1/2+1/3i ", G(F(1, 2), F(1, 3))),
])
def test_parse_complex(text, value):
    assert cli.parse_complex(text) == value


@pytest.mark.parametrize("text,offset", [("", 0), ("1+", 2), ("0.4+0.3x", 7), ("2i+1", 2), ("1i2i", 2), ("abc", 0)])
def test_parse_complex_errors(text, offset):
    with pytest.raises(cli.LiteralError) as info:
        cli.parse_complex(text)
    assert info.value.offset == offset
    assert info.value.caret().splitlines()[1] == " " * offset + "^"


def test_exit_codes_depend_only_on_statuses():
    H, Fa, I = Status.HOLDS, Status.FAILS, Status.INCONCLUSIVE
    assert cli._exit_for([]) == 0
    assert cli._exit_for([H, H]) == 0
    assert cli._exit_for([H, I]) == 2
    assert cli._exit_for([I, Fa, H]) == 1
    assert cli._exit_for([Fa, I]) == cli._exit_for([I, Fa])
