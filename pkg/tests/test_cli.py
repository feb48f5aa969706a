import csv
import io
import json

import pytest

from dtjoyce.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bps_show_bundled_sample(capsys):
    code, out, _ = run(capsys, "bps", "show", "a1.json")
    d = json.loads(out)
    assert code == 0
    assert "uncoupled" in d["flags"] and "finite" in d["flags"]
    assert {tuple(r["class"]) for r in d["dt_table"]} == {(1,), (-1,)}
    assert all(r["dt"] == "1/1" for r in d["dt_table"])


def test_bps_show_structure_file(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"rank": 2, "skew": [[0, 1], [-1, 0]], "central_charge": [[1, 0], [0, 1]],
                             "omega": [{"class": [1, 0], "value": "1/1"}, {"class": [0, 1], "value": "1/1"}],
                             "symmetrize": True}))
    code, out, _ = run(capsys, "bps", "show", str(f))
    assert code == 0
    assert "uncoupled" not in json.loads(out)["flags"]


def test_missing_file_is_input_error(capsys, tmp_path):
    code, _, err = run(capsys, "bps", "show", str(tmp_path / "nope.json"))
    assert code == 2 and "error" in err


def test_rh_solve_conifold_ring_csv(capsys):
    code, out, _ = run(capsys, "rh", "solve", "--family", "conifold", "--hbar-grid", "ring:0.01,10,32",
                       "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    # 32 radii, one row per basis class of the doubled rank-2 lattice
    assert len(rows) == 32 * 4
    radii = sorted({float(r["abs_hbar"]) for r in rows})
    assert len(radii) == 32
    assert radii[0] == pytest.approx(0.01) and radii[-1] == pytest.approx(10)


def test_rh_solve_json_rows(capsys):
    code, out, _ = run(capsys, "rh", "solve", "--family", "a1", "--hbar-grid", "0,1;0,2")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 4
    assert set(rows[0]) == {"hbar", "class", "X"}


def test_rh_verify_jumps(capsys):
    code, out, _ = run(capsys, "rh", "verify", "--family", "a1", "--which", "jumps")
    d = json.loads(out)
    assert code == 0 and d["pass"] and d["max_error"] < 1e-10


def test_rh_verify_failure_exit_code(capsys):
    # an impossible tolerance turns the same check into a verification failure
    code, out, _ = run(capsys, "rh", "verify", "--family", "a1", "--which", "jumps", "--tol", "1e-30")
    assert code == 1 and not json.loads(out)["pass"]


def test_pentagon_is_deterministic(capsys):
    code1, out1, _ = run(capsys, "wallcrossing", "pentagon", "--seed", "7")
    code2, out2, _ = run(capsys, "wallcrossing", "pentagon", "--seed", "7")
    d = json.loads(out1)
    assert code1 == code2 == 0
    assert out1 == out2
    assert set(d) == {"max_error", "samples", "pass"} and d["samples"] == 50


def test_wallcrossing_apply_log_coordinates(capsys):
    code, out, _ = run(capsys, "wallcrossing", "apply", "a2.json", "--params",
                       json.dumps({"point": [[0.1, 0.2], [0.3, -0.1]], "ray_angle": 0.4636476090008061}))
    assert code == 0 and len(json.loads(out)["point"]) == 2


def test_wallcrossing_without_point_is_usage_error(capsys):
    code, _, err = run(capsys, "wallcrossing", "apply", "a2.json", "--params", "{}")
    assert code == 2 and "point" in err


def test_specfn_gamma(capsys):
    code, out, _ = run(capsys, "specfn", "eval", "--fn", "gamma", "--params", '{"z": [5, 0]}')
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx([24.0, 0.0], abs=1e-12)


def test_specfn_li(capsys):
    code, out, _ = run(capsys, "specfn", "eval", "--fn", "li", "--params", '{"k": 1, "x": [0.5, 0]}')
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx([0.6931471805599453, 0.0], abs=1e-14)


def test_joyce_pde(capsys):
    code, out, _ = run(capsys, "joyce", "pde", "--model", "conifold")
    assert code == 0 and json.loads(out)["pass"]


def test_frobenius_a2(capsys):
    code, out, _ = run(capsys, "frobenius", "a2", "--at", "1,1")
    d = json.loads(out)
    assert code == 0
    assert {"U", "V", "eigenvalues", "twisted_products"} <= set(d)


def test_a2_periods_negative_values(capsys):
    code, out, _ = run(capsys, "a2", "periods", "--a", "-1,0.2", "--b", "0.3,-0.1")
    d = json.loads(out)
    assert code == 0 and d["pairing"] == 1
    assert all(z[1] > 0 for z in d["periods"])


def test_a2_discriminant_is_input_error(capsys):
    code, _, _ = run(capsys, "a2", "spectrum", "--a", "0", "--b", "0")
    assert code == 2


def test_negative_tolerance_rejected(capsys):
    assert run(capsys, "bps", "show", "a1.json", "--tol", "-1")[0] == 2
    assert run(capsys, "joyce", "pde", "--model", "a1", "--tol", "0")[0] == 2


def test_unknown_subcommand(capsys):
    assert run(capsys, "nosuch")[0] == 2


def test_verify_subset_passes(capsys, tmp_path):
    out = tmp_path / "report.txt"
    code, _, _ = run(capsys, "verify", "all", "--only", "1,2", "--out", str(out))
    lines = out.read_text().splitlines()
    assert code == 0
    assert len(lines) == 2 and all(l.startswith("[PASS]") for l in lines)


def test_verify_reports_failing_criterion(capsys):
    code, out, _ = run(capsys, "verify", "all", "--only", "6")
    assert code == 1 and out.startswith("[FAIL] criterion  6")


def test_asymmetric_structure_is_input_error(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"rank": 1, "skew": [[0]], "central_charge": [[1, 0]],
                             "omega": [{"class": [1], "value": "1/1"}]}))
    code, _, err = run(capsys, "bps", "show", str(f))
    assert code == 2 and "ASYMMETRIC" in err
