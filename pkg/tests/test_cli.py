import json
import subprocess

import pytest

from paraunit.cli import FamilyFile, run
from paraunit.hadamard import PhaseMatrix

EXAMPLE_CCC = [[[0, 1, 0, 3], [0, 1, 2, 1]], [[0, 3, 0, 1], [0, 3, 2, 3]]]


def write_family(path, kind, q, N, p, m, members):
    path.write_text(json.dumps({"kind": kind, "q": q, "N": N, "p": p, "m": m, "members": members}))
    return str(path)


def call(capsys, *argv):
    rc = run([str(a) for a in argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_verify_quaternary_grid(tmp_path, capsys):
    path = write_family(tmp_path / "ccc.json", "CCC", 4, 2, 2, 2, EXAMPLE_CCC)
    rc, out, _ = call(capsys, "verify", "--family", path)
    assert rc == 0
    assert out.strip() == "CCC q=4 N=2 length=4: PASS"


def test_verify_failure_exit_code(tmp_path, capsys):
    bad = [[[0, 0, 0, 0], [0, 1, 2, 1]], [[0, 3, 0, 1], [0, 3, 2, 3]]]
    rc, out, _ = call(capsys, "verify", "--family", write_family(tmp_path / "bad.json", "CCC", 4, 2, 2, 2, bad))
    assert rc == 1 and out.rstrip().endswith("FAIL")


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["verify", "--family", "/nonexistent/family.json"],
        ["enum", "--q", "3", "--N", "3", "--m", "2", "--threads", "0"],
        ["bh", "list", "--q", "5", "--N", "4"],
    ],
)
def test_usage_errors(argv, capsys):
    rc, _, _ = call(capsys, *argv)
    assert rc == 2


def test_malformed_family(tmp_path, capsys):
    path = write_family(tmp_path / "f.json", "CSS", 4, 2, 2, 2, [[0, 1, 0], [0, 1, 2, 1]])
    assert call(capsys, "verify", "--family", path)[0] == 2
    path = write_family(tmp_path / "g.json", "CSS", 2, 2, 2, 1, [[0, 2], [0, 1]])
    assert call(capsys, "verify", "--family", path)[0] == 2


def test_guard_exit_code(monkeypatch, capsys):
    monkeypatch.setenv("PARAUNIT_GUARD", "100")
    rc, _, err = call(capsys, "enum", "--q", "3", "--N", "3", "--m", "2")
    assert rc == 2 and "PARAUNIT_GUARD" in err


def test_enum_count(capsys):
    rc, out, _ = call(capsys, "enum", "--q", "3", "--N", "3", "--m", "2", "--count-only")
    assert rc == 0 and out.strip() == "486"


def test_enum_report_and_pmepr(tmp_path, capsys):
    csv = tmp_path / "golay.csv"
    rc, out, _ = call(capsys, "seed", "enum", "--q", "2", "--N", "2", "--m", "3", "--out", csv)
    assert rc == 0
    assert out.splitlines() == ["distinct 48", "generated 96", "predicted 48"]
    rc, out, _ = call(capsys, "pmepr", "--family", csv, "--oversample", "64", "--bound", "2.0")
    lines = out.splitlines()
    assert rc == 0 and len(lines) == 49
    assert lines[-1].startswith("max,") and float(lines[-1][4:]) <= 2.0 + 1e-9
    rc, _, _ = call(capsys, "pmepr", "--family", csv, "--bound", "1.5")
    assert rc == 1


def test_generalized_enum(capsys):
    rc, out, _ = call(capsys, "enum", "--q", "2", "--N", "4", "--m", "2", "--generalized", "--count-only")
    assert rc == 0 and out.strip() == "1152"


@pytest.mark.parametrize("argv", [["enum", "--q", "3", "--N", "3", "--m", "2"], ["verify"]])
def test_threads_do_not_change_output(argv, tmp_path, capsys):
    if argv == ["verify"]:
        argv = ["verify", "--family", write_family(tmp_path / "ccc.json", "CCC", 4, 2, 2, 2, EXAMPLE_CCC)]
    outs = {call(capsys, *argv, "--threads", t)[1] for t in (1, 2, 4)}
    assert len(outs) == 1


@pytest.mark.parametrize(
    "argv, kind",
    [
        (["seed", "gen", "--q", "4", "--N", "4", "--m", "2", "--random-seed", "7", "--perm", "1,0"], "CCC"),
        (["seed", "gen", "--q", "3", "--N", "3", "--m", "2"], "CCA"),
        (["genseed", "gen", "--q", "2", "--n", "2", "--m", "2", "--perm", "3,1,0,2"], "CSS"),
    ],
)
def test_generated_families_verify(argv, kind, tmp_path, capsys):
    fam = tmp_path / "fam.json"
    rc, _, _ = call(capsys, *argv, "--kind", kind, "--out", fam)
    assert rc == 0
    assert FamilyFile.from_json(json.loads(fam.read_text())).kind == kind
    rc, out, _ = call(capsys, "verify", "--family", fam)
    assert rc == 0 and "PASS" in out


def test_recur_build_and_export(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"op": "corner"}))
    fam, mat = tmp_path / "cas.json", tmp_path / "matrix.json"
    rc, _, _ = call(capsys, "recur", "build", "--plan", plan, "--kind", "CAS", "--out", fam, "--matrix-out", mat)
    assert rc == 0 and mat.exists()
    data = json.loads(fam.read_text())
    assert data["provenance"]["pu_constant"] == "128"
    assert call(capsys, "verify", "--family", fam)[0] == 0
    rc, out, _ = call(capsys, "export", "--family", fam, "--format", "anf")
    assert rc == 0 and out.splitlines()[0] == "x0x1 + x0x4 + x1x4 + x2x4 + x3x4"
    csv = tmp_path / "cas.csv"
    assert call(capsys, "export", "--family", fam, "--format", "csv", "--out", csv)[0] == 0
    assert len(csv.read_text().strip().splitlines()) >= 4


def test_recur_bad_plan(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"op": "nope"}))
    assert call(capsys, "recur", "build", "--plan", plan)[0] == 2
    plan.write_text(json.dumps({"op": "phase", "q": 2, "phases": [[0, 0], [0, 0]]}))
    assert call(capsys, "recur", "build", "--plan", plan)[0] == 1


def test_bh_subcommands(tmp_path, capsys):
    rc, out, _ = call(capsys, "bh", "list", "--q", "4", "--N", "4")
    assert rc == 0 and len(out.splitlines()) == 2
    first, second = out.splitlines()
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(first)
    b.write_text(second)
    rc, out, _ = call(capsys, "bh", "check", "--matrix", a, "--canonical")
    assert rc == 0 and out.splitlines()[0] == "q=4 N=4: Butson Hadamard"
    assert call(capsys, "bh", "equiv", a, b)[:2] == (1, "inequivalent\n")
    c = tmp_path / "c.json"
    moved = PhaseMatrix.from_json(json.loads(first)).permuted([2, 0, 3, 1], [1, 3, 0, 2]).twisted([1, 0, 3, 2], [0, 2, 1, 1])
    c.write_text(moved.dumps())
    assert call(capsys, "bh", "check", "--matrix", c)[0] == 0
    assert call(capsys, "bh", "equiv", a, c)[:2] == (0, "equivalent\n")
    c.write_text(json.dumps({"q": 4, "N": 2, "phases": [[0, 0], [0, 0]]}))
    assert call(capsys, "bh", "check", "--matrix", c)[0] == 1


def test_console_entry_point():
    proc = subprocess.run(["paraunit", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("paraunit ")
