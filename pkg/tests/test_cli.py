import json
import subprocess
import sys

import pytest

from conftest import Z3, needs_z3
from tabmc.cli import EXIT_BAD_TRACE, EXIT_ERROR, EXIT_FOUND, EXIT_OK, EXIT_UNKNOWN, RunReport, main
from tabmc.query import parse_query
from tabmc.solver import Verdict


@pytest.fixture
def model_file(tmp_path):
    def write(family, n=2, broken=False):
        path = tmp_path / f"{family}{n}{'b' if broken else ''}.ta"
        args = ["gen", family, str(n), "-o", str(path)] + (["--broken"] if broken else [])
        assert main(args) == EXIT_OK
        return str(path)
    return write


def test_gen_writes_parseable_model(model_file, capsys):
    path = model_file("fischer", 3)
    assert "automaton P3" in open(path).read()
    assert main(["gen", "demo"]) == EXIT_OK
    assert "automaton A" in capsys.readouterr().out


def test_gen_rejects_tiny_instances(capsys):
    assert main(["gen", "token-ring", "1"]) == EXIT_ERROR


def test_encode_emits_script(model_file, tmp_path, capsys):
    out = tmp_path / "f.smt2"
    assert main(["encode", model_file("fischer"), "-k", "4", "--emit", str(out)]) == EXIT_OK
    text = out.read_text()
    assert text.rstrip().endswith("(check-sat)") and "(set-logic ALL)" in text
    assert main(["encode", model_file("demo"), "-k", "3", "--check", "reachable A.q2",
                 "--logic", "QF_BVLRA"]) == EXIT_OK
    assert "(set-logic QF_BVLRA)" in capsys.readouterr().out


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.ta"
    bad.write_text("automaton A { init q; location q; trans q -> r; }")
    assert main(["encode", str(bad), "-k", "3"]) == EXIT_ERROR
    assert "bad.ta:1:" in capsys.readouterr().err


def test_bad_query_and_missing_file(model_file, tmp_path, capsys):
    assert main(["check", model_file("demo"), "-k", "3", "--check", "reachable A.zz"]) == EXIT_ERROR
    assert main(["check", str(tmp_path / "nope.ta"), "-k", "3", "--check", "reachable true"]) == EXIT_ERROR


def test_bound_below_two_rejected(model_file):
    with pytest.raises(SystemExit) as exc:
        main(["encode", model_file("demo"), "-k", "1"])
    assert exc.value.code == 2


def test_missing_solver_exit(model_file):
    assert main(["check", model_file("demo"), "-k", "3", "--check", "reachable true",
                 "--solver", "definitely-not-a-solver"]) == EXIT_ERROR


@needs_z3
def test_check_holds(model_file, capsys):
    code = main(["check", model_file("fischer"), "-k", "8", "--check", "invariant !(P1.cs && P2.cs)",
                 "--solver", Z3])
    assert code == EXIT_OK
    assert "property holds for all lasso runs up to bound k=8" in capsys.readouterr().out


@needs_z3
def test_check_counterexample_structured(model_file, tmp_path, capsys):
    trace = tmp_path / "cex.json"
    code = main(["check", model_file("fischer", broken=True), "-k", "10", "--check",
                 "invariant !(P1.cs && P2.cs)", "--solver", Z3, "--trace-format", "structured",
                 "--trace-out", str(trace)])
    assert code == EXIT_FOUND
    data = json.loads(trace.read_text())
    assert 0 < data["loop"] < 10 and len(data["positions"]) == 12
    assert "counterexample found" in capsys.readouterr().out


@needs_z3
def test_check_reachability_table(model_file, capsys):
    code = main(["check", model_file("demo"), "-k", "5", "--liveness", "none", "--check", "reachable n = 1",
                 "--solver", Z3])
    out = capsys.readouterr().out
    assert code == EXIT_OK and out.startswith("pos ") and "witness found" in out


@needs_z3
def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "tabmc.cli", "gen", "demo"], capture_output=True, text=True)
    assert proc.returncode == 0 and "automaton" in proc.stdout


@pytest.mark.parametrize("verdict,kind,trace_ok,code", [
    (Verdict.UNSAT, "invariant", False, EXIT_OK),
    (Verdict.UNSAT, "reachable", False, EXIT_FOUND),
    (Verdict.SAT, "invariant", True, EXIT_FOUND),
    (Verdict.SAT, "reachable", True, EXIT_OK),
    (Verdict.SAT, "reachable", False, EXIT_BAD_TRACE),
    (Verdict.TIMEOUT, "invariant", False, EXIT_UNKNOWN),
    (Verdict.UNKNOWN, "reachable", False, EXIT_UNKNOWN),
])
def test_exit_code_table(verdict, kind, trace_ok, code):
    rep = RunReport(verdict, 3, parse_query(f"{kind} true"), 0.0, 0.0)
    if trace_ok:
        rep.trace, rep.witness = object(), [0]
    assert rep.exit_code == code
