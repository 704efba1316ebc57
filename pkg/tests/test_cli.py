import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from lbmfd import catalog
from lbmfd.cli import EXIT_DIVERGENCE, EXIT_INVARIANT, EXIT_OK, EXIT_USER, main
from lbmfd.reduce import from_dict
from lbmfd.schemefile import format_scheme_file
from lbmfd.sim import load_field

from reference_schemes import fd_schemes, link_two_step


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_derive_d1q3_matches_reduction(capsys, tmp_path):
    out = tmp_path / "d1q3.json"
    code, text, _ = run(capsys, "derive", "--scheme", "d1q3", "--out", str(out), "--no-timestamp")
    assert code == EXIT_OK
    assert text.startswith("m1[n+1] = + [")
    doc = json.loads(out.read_text())
    assert from_dict(doc["schemes"][0]) == fd_schemes()["d1q3"][0]


def test_derive_d1q2_is_two_step(capsys, tmp_path):
    out = tmp_path / "d1q2.json"
    code, text, _ = run(capsys, "derive", "--scheme", "d1q2", "--out", str(out), "--no-timestamp")
    assert code == EXIT_OK and "m1[n-1]" in text and "m1[n-2]" not in text
    assert from_dict(json.loads(out.read_text())["schemes"][0]) == fd_schemes()["d1q2"][0]


@pytest.mark.parametrize("W", [1, 2, 3])
def test_derive_link_mpafr(capsys, tmp_path, W):
    out = tmp_path / "link.json"
    code, _, _ = run(capsys, "derive", "--scheme", "link", "--W", str(W), "--path", "mpafr",
                     "--out", str(out), "--no-timestamp")
    assert code == EXIT_OK
    fd = from_dict(json.loads(out.read_text())["schemes"][0])
    assert fd.K == 2 and fd == link_two_step(W)


def test_derive_with_exact_binding(capsys):
    code, text, _ = run(capsys, "derive", "--scheme", "d1q3", "--bind", "p=1", "--no-timestamp")
    assert code == EXIT_OK and "m1[n-1]" in text and "m1[n-2]" not in text


def test_timestamp_line_and_determinism(capsys, tmp_path):
    _, with_ts, _ = run(capsys, "derive", "--scheme", "d2q4")
    assert with_ts.startswith("# generated by lbmfd")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    outs = []
    for path in (a, b):
        outs.append(run(capsys, "derive", "--scheme", "d2q4", "--out", str(path), "--no-timestamp")[1])
    assert outs[0] == outs[1] == with_ts.split("\n", 1)[1]
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("name", ["d1q2", "d1q3", "d2q4", "link2", "d1q3_two"])
def test_check_passes(capsys, name):
    code, text, _ = run(capsys, "check", "--scheme", name, "--no-timestamp")
    assert code == EXIT_OK and "FAIL" not in text and text.count("PASS") >= 3


def test_stability_probe(capsys):
    base = ["stability", "--scheme", "d1q3", "--bind", "p=1", "--bind", "lambda=1", "--bind", "C=1/2",
            "--bind", "D=-0.625", "--no-timestamp"]
    code, text, _ = run(capsys, *base, "--bind", "s=1.15")
    assert code == EXIT_OK and text.splitlines()[1].startswith("1,")
    code, text, _ = run(capsys, *base, "--bind", "s=1.2")
    row = next(csv.DictReader(io.StringIO(text)))
    assert row["stable"] == "0" and float(row["worst_modulus"]) > 1


def test_scan_probe_cells(capsys):
    code, text, _ = run(capsys, "scan", "--scheme", "d1q3", "--bind", "p=1", "--bind", "lambda=1",
                        "--bind", "C=1/2", "--no-timestamp")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 1600
    s = np.array([float(r["s"]) for r in rows])
    D = np.array([float(r["D"]) for r in rows])
    ok = np.array([r["stable"] == "1" for r in rows])

    def cell(s0, D0):
        k = np.argmin((s - s0) ** 2 + (D - D0) ** 2)
        return ok[k]

    for s0 in (0.5, 1.0, 1.9):
        assert cell(s0, 0.4)
    assert not cell(1.0, -0.9)
    assert not cell(1.0, 0.6)
    assert not cell(1.6, -0.6)


def test_simulate_compare_and_dump(capsys, tmp_path):
    out = tmp_path / "field.bin"
    code, text, _ = run(capsys, "simulate", "--scheme", "d2q4", "--grid", "16x16", "--steps", "30",
                        "--compare", "--out", str(out), "--no-timestamp",
                        *[f"--bind={k}={v}" for k, v in catalog.DEFAULT_BINDINGS["d2q4"].items()])
    assert code == EXIT_OK
    dev = float(next(l for l in text.splitlines() if l.startswith("max_relative")).split(",")[1])
    assert dev < 1e-11
    field, dx = load_field(out)
    assert field.shape == (1, 16, 16) and dx == 1.0


def test_simulate_divergence_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--scheme", "d1q2", "--grid", "32", "--steps", "4000",
                       "--bind", "lambda=1", "--bind", "s=1.9", "--bind", "C=3")
    assert code == EXIT_DIVERGENCE and "diverged" in err


def test_converge_writes_tables(capsys, tmp_path):
    code, text, _ = run(capsys, "converge", "--bind", "s=1", "--bind", "D=0.4", "--data", "d",
                        "--levels", "5:7", "--out", str(tmp_path), "--no-timestamp")
    assert code == EXIT_OK
    table = (tmp_path / "d1q3_d_s1_D0.4.csv").read_text().splitlines()
    assert table[0] == "dx,error,order" and len(table) == 4
    assert text.splitlines()[0] == "label,expected_order,finest_order,fitted_order,diverged"


@pytest.mark.parametrize("argv", [
    ["derive"],
    ["derive", "--scheme", "nosuch"],
    ["derive", "--scheme", "d1q3", "--bind", "p"],
    ["derive", "--scheme", "d1q3", "--bind", "q=1"],
    ["stability", "--scheme", "d1q3", "--bind", "s=1"],
    ["scan", "--scheme", "d1q3", "--grid", "s=0:2"],
    ["simulate", "--scheme", "d2q4", "--grid", "16"],
    ["converge", "--levels", "6-11", "--preset", "fig3"],
])
def test_user_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USER and "error" in err


def test_unknown_command_exits_with_user_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USER


def test_malformed_file_reports_line(capsys, tmp_path):
    text = format_scheme_file(catalog.d1q3()).replace("m3 = 2*lambda^2*D*m1", "m3 = m5")
    path = tmp_path / "bad.scheme"
    path.write_text(text)
    code, _, err = run(capsys, "derive", "--scheme", str(path))
    assert code == EXIT_USER and "line" in err and "m5" in err


def test_annihilation_failure_exit_code(capsys, monkeypatch):
    from lbmfd import linalg

    def broken(C, kept):
        return linalg.RingPoly(C.dim, [linalg.OperatorPoly.one(C.dim)] * 2)

    monkeypatch.setattr("lbmfd.reduce.charpoly_trimmed", broken)
    code, _, err = run(capsys, "derive", "--scheme", "d1q3")
    assert code == EXIT_INVARIANT and "invariant" in err


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "lbmfd.cli", "derive", "--scheme", "d1q2", "--no-timestamp"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("m1[n+1]")
