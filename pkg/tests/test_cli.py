import os

import pytest

from lsfem.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("solve", "convergence", "condition", "compare", "list-problems", "--threads"):
        assert flag in out


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["convergence", "--problem", "no-such-problem"])
    assert exc.value.code == 1


def test_bad_value_exits_one(tmp_path, capsys):
    code, out, err = run(
        capsys, "--out-dir", str(tmp_path),
        "convergence", "--problem", "smooth", "--eps", "7.0", "--levels", "1", "--base-n", "2",
    )
    assert code == 1
    assert "error" in err


def test_numerical_failure_exits_two(tmp_path, capsys):
    # an absurdly small iteration cap forces CG to give up
    code, out, err = run(
        capsys, "--out-dir", str(tmp_path),
        "solve", "--problem", "smooth", "--eps", "1e-3", "--mesh-n", "8", "--maxit", "2",
    )
    assert code == 2
    assert "numerical failure" in err


def test_list_problems(capsys):
    code, out, _ = run(capsys, "list-problems")
    assert code == 0
    for name in ("smooth", "rotating", "interior-layer", "boundary-layer", "transport"):
        assert name in out


def test_convergence_writes_csv_with_eoc(tmp_path, capsys):
    code, out, _ = run(
        capsys, "--out-dir", str(tmp_path),
        "convergence", "--problem", "smooth", "--eps", "1e-3",
        "--k", "0", "--levels", "2", "--base-n", "4",
    )
    assert code == 0
    assert "eoc" in out
    files = os.listdir(tmp_path)
    assert "convergence_smooth_P1_weak.csv" in files


def test_condition_table(tmp_path, capsys):
    code, out, _ = run(
        capsys, "--out-dir", str(tmp_path),
        "condition", "--problem", "smooth", "--k", "0",
        "--levels", "2", "--base-n", "2", "--eps-list", "1,1e-3",
    )
    assert code == 0
    assert "kappa" in out
    assert "condition_smooth_P1.csv" in os.listdir(tmp_path)


def test_solve_writes_vtk(tmp_path, capsys):
    code, out, _ = run(
        capsys, "--out-dir", str(tmp_path),
        "solve", "--problem", "interior-layer", "--eps", "1e-3",
        "--k", "1", "--mesh-n", "4", "--bc", "weak",
    )
    assert code == 0
    vtks = [f for f in os.listdir(tmp_path) if f.endswith(".vtk")]
    assert vtks == ["interior-layer_P2_weak_32.vtk"]


def test_solve_from_mesh_file(tmp_path, capsys):
    from lsfem.mesh import generate_structured, save_mesh

    path = str(tmp_path / "grid.mesh")
    save_mesh(generate_structured(4, 0.1), path)
    code, out, _ = run(
        capsys, "--out-dir", str(tmp_path),
        "solve", "--problem", "smooth", "--eps", "1e-3", "--mesh-file", path,
    )
    assert code == 0
    assert "errors:" in out


def test_identical_argv_identical_output(tmp_path, capsys):
    argv = [
        "--out-dir", str(tmp_path),
        "convergence", "--problem", "smooth", "--eps", "1e-3",
        "--levels", "2", "--base-n", "4",
    ]
    code1, out1, _ = run(capsys, *argv)
    csv1 = (tmp_path / "convergence_smooth_P1_weak.csv").read_bytes()
    code2, out2, _ = run(capsys, *argv)
    csv2 = (tmp_path / "convergence_smooth_P1_weak.csv").read_bytes()
    assert (code1, out1) == (code2, out2)
    assert csv1 == csv2


def test_outdir_env_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LSFEM_OUTDIR", str(tmp_path))
    code, out, _ = run(
        capsys, "solve", "--problem", "smooth", "--eps", "1e-3", "--mesh-n", "2",
    )
    assert code == 0
    assert any(f.endswith(".vtk") for f in os.listdir(tmp_path))


def test_rotating_solve_uses_slit(tmp_path, capsys):
    code, out, _ = run(
        capsys, "--out-dir", str(tmp_path),
        "solve", "--problem", "rotating", "--mesh-n", "8", "--k", "0",
    )
    assert code == 0
    assert "note:" in out
