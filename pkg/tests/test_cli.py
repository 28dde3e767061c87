import csv
import io
import subprocess
import sys

import pytest

from ibcdof.cli import main, parse_range, parse_theta, schedule_text, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_helpers():
    assert parse_range("3") == [3]
    assert parse_range("2..5") == [2, 3, 4, 5]
    assert parse_range("1,4,7") == [1, 4, 7]
    assert parse_theta("max") is None and parse_theta("3") == 3
    for bad in ("x", "5..3"):
        with pytest.raises(UsageError):
            parse_range(bad)
    with pytest.raises(UsageError):
        parse_theta("three")


def test_dof_exact_values(capsys):
    code, out, _ = run(capsys, "dof", "--L", "2..3", "--C", "2", "--scheme", "uMAT,MAT,Coop")
    assert code == 0
    got = {(r["scheme"], r["L"]): (r["dof_num"], r["dof_den"]) for r in rows_of(out)}
    assert got[("uMAT", "2")] == ("8", "5")
    assert got[("uMAT", "3")] == ("90", "47")
    assert got[("MAT", "3")] == ("18", "11")
    assert got[("Coop", "2")] == ("48", "25")


def test_dof_truncated(capsys):
    code, out, _ = run(capsys, "dof", "--L", "6", "--C", "1", "--theta", "3", "--scheme", "MAT")
    assert code == 0
    (row,) = rows_of(out)
    assert (row["dof_num"], row["dof_den"], row["theta"]) == ("36", "17", "3")
    assert float(row["dof_float"]) == pytest.approx(36 / 17)


def test_schedule_table(capsys):
    code, out, _ = run(capsys, "schedule", "--L", "6", "--C", "1", "--theta", "3")
    assert code == 0
    assert out == schedule_text(6, 1, 3)
    lines = out.splitlines()
    assert lines[1] == "6,1,3,5,30,85"
    assert lines[3:] == ["1,6,5,0,30", "2,15,1,0,15", "3,20,2,0,40"]


def test_simulate_outputs_and_determinism(capsys, tmp_path):
    args = ["simulate", "--L", "2", "--C", "2", "--seeds", "0..1"]
    code, out, err = run(capsys, *args)
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 8
    assert all(r["lcs"] == "4" and r["decodable"] == "1" for r in rows)
    assert "achieved DoF 8/5" in err
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(f1)]) == 0
    assert main(args + ["--out", str(f2), "--jobs", "2"]) == 0
    assert f1.read_bytes() == f2.read_bytes()


def test_simulate_naive_exits_zero(capsys):
    code, out, err = run(capsys, "simulate", "--scheme", "naive", "--L", "3", "--C", "2",
                         "--theta", "3", "--seeds", "0")
    assert code == 0
    assert "NOT decodable" in err
    assert any(r["decodable"] == "0" for r in rows_of(out))


def test_simulate_mat_bc(capsys):
    code, out, _ = run(capsys, "simulate", "--scheme", "mat_bc", "--L", "6", "--C", "1",
                       "--theta", "3", "--seeds", "0")
    assert code == 0
    assert {(r["rank_I"], r["rank_joint"], r["lcs"]) for r in rows_of(out)} == {("55", "85", "30")}


def test_simulate_decodability_failure_exit_code(capsys, monkeypatch):
    import ibcdof.cli as cli
    from ibcdof.simengine import SimConfig

    def few_antennas(variant, L, C, theta, seed, tol):
        return SimConfig.umat_ibc(L, theta, seed, tol_scale=tol, antennas=1)

    monkeypatch.setattr(cli, "_sim_config", few_antennas)
    code, _, _ = run(capsys, "simulate", "--L", "2", "--C", "2", "--seeds", "0")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["dof", "--scheme", "XYZ"],
    ["dof", "--L", "a..b"],
    ["simulate", "--scheme", "mat_bc", "--C", "2"],
    ["simulate", "--C", "3"],
    ["simulate", "--seeds", "1,1"],
    ["schedule", "--L", "3", "--C", "2", "--theta", "5"],
    ["frobnicate"],
    [],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == 1


def test_figures(tmp_path):
    assert main(["figures", "--out", str(tmp_path)]) == 0
    fig3 = rows_of((tmp_path / "fig3.csv").read_text())
    fig4 = rows_of((tmp_path / "fig4.csv").read_text())
    fig5 = rows_of((tmp_path / "fig5.csv").read_text())
    assert len(fig3) == 38 * 10
    assert len(fig4) == 39 * 4
    assert {"MAT", "uMAT"} == {r["series"] for r in fig5}
    pt = [r for r in fig5 if (r["L"], r["C"], r["Q"], r["theta"]) == ("2", "2", "2", "2")]
    assert (pt[0]["tau"], pt[0]["dof_num"], pt[0]["dof_den"]) == ("10", "8", "5")
    pt = [r for r in fig5 if (r["L"], r["C"], r["Q"], r["theta"]) == ("2", "4", "2", "2")]
    assert pt[0]["tau"] == "60"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ibcdof", "dof", "--L", "2", "--C", "2",
                          "--scheme", "uMAT"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "uMAT,2,2,2,8,5," in res.stdout
