import subprocess
import sys

import pytest

from hyltl.cli import main
from hyltl.haformat import parse_ha

HYB = "F({x>=21} & X on)"


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gamma_prints_discrete_formula(capsys):
    code, out, _ = run(["gamma", "-f", HYB, "--actions", "on,off", "--encoding", "on=1"], capsys)
    assert code == 0
    assert out == '!b0 & !b1 & (true U ("x >= 21" & X(b0 & !b1)))\n'


def test_bha_dot_has_three_locations(capsys):
    code, out, err = run(["bha", "--formula", HYB, "--actions", "on,off", "--vars", "x", "--format", "dot"], capsys)
    assert code == 0
    assert sum(1 for l in out.splitlines() if "[label=" in l and "->" not in l) == 3
    assert "pi: skipped" in err


def test_bha_on_negative_formula_applies_pi(capsys):
    code, _, err = run(["bha", "-f", "F(!{x>=18} & X G !on)", "--actions", "on,off"], capsys)
    assert code == 0 and "pi: applied" in err


def test_compose_mismatched_vars_is_input_error(tmp_path, fixtures, capsys):
    prop = tmp_path / "bha.ha"
    assert main(["bha", "-f", "F({y>1} & X on)", "--actions", "on,off", "--out", str(prop)]) == 0
    code, _, err = run(["compose", "--system", str(fixtures / "thermostat.ha"), "--property", str(prop),
                        "--format", "monitor"], capsys)
    assert code == 2 and "variable" in err


def test_compose_from_formula(fixtures, tmp_path, capsys):
    out = tmp_path / "p.ha"
    code = main(["compose", "--system", str(fixtures / "thermostat.ha"), "-f", HYB, "--encoding", "on=1",
                 "--out", str(out)])
    assert code == 0
    assert parse_ha(out.read_text()) == parse_ha((fixtures / "thermostat_product.ha").read_text())


def test_export_formats(fixtures, capsys):
    for fmt, marker in (("text", "vars: x"), ("dot", "digraph"), ("hoa", "HOA: v1"), ("monitor", "automaton")):
        code, out, _ = run(["export", str(fixtures / "thermostat.ha"), "--format", fmt], capsys)
        assert code == 0 and marker in out


def test_ba_from_hoa(tmp_path, capsys):
    code, hoa_text, _ = run(["ba", "-f", HYB, "--actions", "on,off", "--encoding", "on=1", "--format", "hoa"], capsys)
    assert code == 0
    path = tmp_path / "a.hoa"
    path.write_text(hoa_text)
    code, direct, _ = run(["bha", "-f", HYB, "--actions", "on,off", "--encoding", "on=1"], capsys)
    code2, via, _ = run(["bha", "-f", HYB, "--actions", "on,off", "--encoding", "on=1", "--from-hoa", str(path)], capsys)
    assert code == code2 == 0 and direct == via


@pytest.mark.parametrize(
    "argv,code",
    [
        ([], 1),
        (["frobnicate"], 1),
        (["bha"], 1),
        (["ba", "-f", HYB, "--format", "dot"], 1),
        (["bha", "-f", "F({x>=21} &"], 2),
        (["bha", "-f", "heat", "--actions", "on"], 2),
        (["export", "/nonexistent.ha"], 2),
        (["gamma", "-f", HYB, "--encoding", "on"], 1),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code


def test_deterministic_output(capsys):
    argv = ["bha", "-f", "F(!{x>=18} & X G !on)", "--actions", "on,off", "--format", "monitor"]
    outs = {run(argv, capsys)[1] for _ in range(3)}
    assert len(outs) == 1


def test_check_runs_suites(capsys, monkeypatch):
    monkeypatch.setenv("HYLTL_SEED", "4")
    code, out, _ = run(["check", "--random", "3", "--bound-loop", "1"], capsys)
    assert code == 0
    assert out.count("0 mismatches") == 3


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "hyltl.cli", "parse", "-f", "G on"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "!(true U !on)"
