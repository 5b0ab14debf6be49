import json
import subprocess
import sys

import pytest

from htoffoli import analysis, cli
from htoffoli import routines as R
from htoffoli.circuit import parse


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_verify_identities(capsys):
    code, out = run(capsys, "verify-identities")
    assert code == 0 and out.count("PASS") == len(analysis.IDENTITY_NAMES)


def test_verify_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(analysis, "verify_identities", lambda: [analysis.IdentityResult("broken", False, 0.0)])
    code, out = run(capsys, "verify-identities", "--format", "json")
    assert code == 1 and json.loads(out)["passed"] is False


def test_enumerate_json(capsys):
    code, out = run(capsys, "enumerate", "h-to-toffoli", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["count"] == 256 and len(data["records"]) == 256
    assert data["records"][0] == {"mask": 0, "flagged": [], "accepted": True, "residual": "III"}


def test_polynomials_text_and_json_agree(capsys):
    _, text = run(capsys, "polynomials", "h-to-toffoli")
    _, js = run(capsys, "polynomials", "h-to-toffoli", "--format", "json")
    data = json.loads(js)
    lines = {line.split()[0]: line.split(":")[1].split() for line in text.splitlines() if "coefficients" in line}
    assert lines["a(p)"] == data["acceptance"]
    assert lines["e(p)a(p)"] == data["error_times_acceptance"]
    assert data["acceptance"] == ["1", "-8", "56", "-224", "560", "-896", "896", "-512", "128"]


def test_polynomials_need_weight_limit_for_large_routines(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["polynomials", "twenty-six-to-six"])
    assert err.value.code == 2
    code, out = run(capsys, "polynomials", "twenty-six-to-six", "--max-weight", "2", "--format", "json")
    assert all(v == ["0", "0", "19"] for v in json.loads(out)["marginal_errors"].values())


def test_classes_with_targets(capsys):
    code, out = run(capsys, "classes", "h-to-toffoli", "--o", "3", "--format", "json")
    classes = json.loads(out)["classes"]
    assert code == 0 and classes["ZII"][:3] == ["0", "0", "6"]


def test_distill(capsys):
    code, out = run(capsys, "distill-toffoli", "--variant", "target", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["outputs"]["IIX"] == ["0", "0", "1"]


def test_count_with_rules_file(capsys, tmp_path):
    f = tmp_path / "rules.json"
    f.write_text('{"data_prep": 0}')
    _, out = run(capsys, "count", "h-to-toffoli", "--rules", str(f), "--format", "json")
    assert json.loads(out)["total"] == "34"
    _, out = run(capsys, "count", "indirect-toffoli")
    assert out.startswith("indirect-toffoli: 15 locations")


def test_table1_text_and_json_agree(capsys):
    _, js = run(capsys, "table1", "--format", "json")
    _, text = run(capsys, "table1")
    data = json.loads(js)
    assert data["rows"]["twenty-six-to-six"]["gate"]["quoted"] == "758/3"
    assert "252.7" in text and "91" in text


def test_export_round_trips(capsys, tmp_path):
    _, out = run(capsys, "export", "indirect-toffoli")
    assert parse(out).structurally_equal(R.indirect_toffoli())
    f = tmp_path / "c.txt"
    run(capsys, "export", "h-to-toffoli", "--o", "3", "-o", str(f))
    assert parse(f.read_text()).magic_count == 12


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["count", "nine-to-one"],
        ["count", "ten-to-two", "--o", "3"],
        ["enumerate", "h-to-toffoli", "--o", "1"],
        ["distill-toffoli", "--input", "XII=1"],
        ["table1", "--rules", "/nonexistent.json"],
        ["classes", "fourteen-to-two"],
    ],
)
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as err:
        cli.main(argv)
    assert err.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "htoffoli", "count", "h-to-toffoli"], capture_output=True, text=True)
    assert proc.returncode == 0 and "36 locations" in proc.stdout
