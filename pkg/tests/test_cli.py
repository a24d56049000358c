import csv
import io
import json
import subprocess
import sys

import pytest

from zhuforge.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run_cli(capsys, *argv)
    return code, json.loads(out)


def test_check_conditions_zhu(capsys):
    code, doc = run_json(capsys, "check-conditions", "--f", "c*(u+1)", "--g", "deriv", "--c", "1", "--jmax", "6")
    assert code == 0
    assert doc["schema"] == 1 and doc["command"] == "check-conditions" and doc["verdict"] == "pass"


def test_check_conditions_tampered(capsys):
    code, doc = run_json(capsys, "check-conditions", "--f", "z^-1 + z", "--g=-z^-2 + 1")
    assert code == 1
    assert doc["verdict"] == "fail"
    assert doc["conditions"]["left_ideal"]["witness"]


def test_check_conditions_c2_and_modes(capsys):
    assert run_cli(capsys, "check-conditions", "--f", "z^-1")[0] == 0
    dlm = ["check-conditions", "--f", "1 - 3*u^2 - 2*u^3", "--g", "u^4 + 2*u^3 + u^2"]
    assert run_cli(capsys, *dlm, "--mode", "allow_constants")[0] == 0
    # F = f - g in family coordinates needs the reflected generators
    args = ["check-conditions", "--f", "1 - u^2"]
    assert run_cli(capsys, *args, "--mode", "allow_constants")[0] == 1
    assert run_cli(capsys, *args, "--mode", "tv_symmetric")[0] == 0


def test_solve_ode(capsys):
    code, doc = run_json(capsys, "solve-ode", "--f0", "0", "--order", "8")
    assert code == 0
    assert doc["series"] == "z^-1 + O(z^9)"
    code, doc = run_json(capsys, "solve-ode", "--f0", "1/2", "--order", "3")
    assert doc["coefficients"] == {"-1": "1", "0": "1/2", "1": "1/12", "3": "-1/720"}


def test_check_family(capsys):
    assert run_cli(capsys, "check-family", "--p", "0:1")[0] == 0
    assert run_cli(capsys, "check-family", "--p", "0:-1")[0] == 1
    assert run_cli(capsys, "check-family", "--p", "0:-1", "--mode", "tv_symmetric")[0] == 0


def test_bernoulli_identity_csv(capsys):
    code, out, _ = run_cli(capsys, "bernoulli-identity", "--nmax", "40", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 39
    assert rows[2] == {"n": "4", "lhs": "1/144", "rhs": "1/144", "verdict": "pass"}


def test_verify_elliptic(capsys):
    code, doc = run_json(capsys, "verify-elliptic", "--jmax", "4", "--qorder", "6", "--xorder", "12")
    assert code == 0
    assert len(doc["records"]) == 14


def test_eisenstein_text(capsys):
    code, out, _ = run_cli(capsys, "eisenstein", "--k", "1", "--qorder", "4", "--format", "text")
    assert code == 0
    assert "value: 1 - 24*q - 72*q^2 - 96*q^3 + O(q^4)" in out


def test_axioms_small(capsys):
    code, doc = run_json(capsys, "axioms", "--algebra", "virasoro", "--max-weight", "3", "--range", "2")
    assert code == 0
    assert [r["mode"] for r in doc["reports"]] == ["borcherds", "commutator", "skew", "translation", "grading"]
    code, doc = run_json(capsys, "axioms", "--mode", "borcherds", "--sample", "a(-1)|0> + |0>", "--range", "2")
    assert code == 0 and doc["reports"][0]["checked"] == 8 * 125


def test_zhu_with_product(capsys):
    code, doc = run_json(capsys, "zhu", "--algebra", "heisenberg", "--variant", "zhu", "--cutoff", "4", "--product", "a(-1)|0>", "a(-1)|0>")
    assert code == 0
    assert doc["per_weight_dims"] == [1, 1, 1, 1, 1]
    assert doc["product"]["value"]
    assert set(doc["checks"]) == {"associativity", "unit", "fcomm", "commutativity"}


def test_zhu_stabilize(capsys):
    code, doc = run_json(capsys, "zhu", "--cutoff", "4", "--stabilize")
    assert code == 0 and doc["checks"]["stabilization"]["verdict"] == "pass"


def test_c2_virasoro(capsys):
    code, doc = run_json(capsys, "c2", "--algebra", "virasoro", "--cutoff", "6")
    assert code == 0
    assert doc["per_weight_dims"] == [1, 0, 1, 0, 1, 0, 1]
    assert "bracket_table" in doc


def test_variant(capsys):
    code, half = run_json(capsys, "variant", "--name", "zhu_half", "--cutoff", "4")
    assert code == 0 and half["include_TV"]
    code, fam = run_json(capsys, "variant", "--name", "family", "--p", "0:1", "--cutoff", "4")
    assert code == 0
    assert fam["f_series"] == half["f_series"] and fam["g_series"] == half["g_series"]


def test_emit_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, out, _ = run_cli(capsys, "c2", "--cutoff", "4", "--emit", str(path))
        assert code == 0 and out == ""
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["command"] == "c2"


@pytest.mark.parametrize(
    "argv",
    [
        ["check-conditions", "--f", "u + z"],
        ["check-conditions", "--f", "sin(u)"],
        ["zhu", "--product", "L(-2)|0>", "a(-1)|0>"],
        ["check-family", "--p", "1"],
    ],
)
def test_parse_errors_exit_2(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 2 and out == ""
    assert "parse error" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["zhu", "--cutoff", "13"],
        ["eisenstein", "--qorder", "33"],
        ["solve-ode", "--order", "65"],
        ["solve-ode", "--f0", "0.5"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_window_error_exit_2(capsys):
    code, _, err = run_cli(capsys, "zhu", "--cutoff", "2", "--product", "a(-1)a(-1)|0>", "a(-1)a(-1)|0>")
    assert code == 2 and "WeightOverflow" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "zhuforge", "solve-ode", "--f0", "0", "--order", "4", "--format", "text"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("solve-ode: pass")
