from __future__ import annotations

import json
from pathlib import Path

import pytest

import ezfowler
import ezfowler.cli as cli_module
from ezfowler.errors import NonConvergenceError
from ezfowler.files import read_solution


def test_solve_writes_solution_and_summary(tmp_path: Path, capsys) -> None:  # noqa: ANN001
    out = tmp_path / "solution.json"
    code = cli_module.main(["solve", "--n", "3", "--sigma", "1", "--period", "10", "--grid", "256", "--out", str(out)])
    assert code == cli_module.EXIT_OK
    summary = capsys.readouterr().out.strip()
    assert summary.startswith("T=10 J=")
    assert "variant=nonconstant" in summary
    record = read_solution(out)
    assert record.grid_size == 256
    assert record.variant == "nonconstant"
    assert record.provenance["timestamp"] is None


def test_solve_is_deterministic(tmp_path: Path) -> None:
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        assert cli_module._run_solve(3, 1.0, 3.0, grid=64, out=str(path)) == cli_module.EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_solve_subcritical_flag(tmp_path: Path) -> None:
    out = tmp_path / "sub.json"
    code = cli_module._run_solve(1, 0.25, 20.0, grid=128, subcritical_p=2.0, out=str(out))
    assert code == cli_module.EXIT_OK
    assert read_solution(out).power == pytest.approx(0.5)


def test_solve_reports_invalid_parameters(capsys) -> None:  # noqa: ANN001
    code = cli_module._run_solve(3, 2.0, 10.0)
    assert code == cli_module.EXIT_USAGE
    assert capsys.readouterr().err.startswith("error: sigma must lie in (0, n/2)")


def test_solve_rejects_odd_grid(capsys) -> None:  # noqa: ANN001
    assert cli_module._run_solve(3, 1.0, 10.0, grid=101) == cli_module.EXIT_USAGE
    assert "grid size" in capsys.readouterr().err


def test_solve_nonconvergence_writes_partial(tmp_path: Path, capsys) -> None:  # noqa: ANN001
    out = tmp_path / "partial.json"
    code = cli_module._run_solve(1, 0.25, 20.0, grid=64, max_iters=1, subcritical_p=2.0, out=str(out))
    assert code == cli_module.EXIT_NONCONVERGENCE
    assert "did not converge" in capsys.readouterr().err
    assert json.loads(out.read_text(encoding="utf-8"))["provenance"]["converged"] is False


def test_solve_nonconvergence_without_partial(monkeypatch, capsys) -> None:  # noqa: ANN001
    def fail(*_args, **_kwargs):  # noqa: ANN002, ANN003, ANN202
        raise NonConvergenceError("stalled")

    monkeypatch.setattr(cli_module, "solve", fail)
    assert cli_module._run_solve(3, 1.0, 10.0, grid=64) == cli_module.EXIT_NONCONVERGENCE
    assert "stalled" in capsys.readouterr().err


def test_usage_errors_exit_with_one(capsys) -> None:  # noqa: ANN001
    with pytest.raises(SystemExit) as excinfo:
        cli_module.main(["solve", "--n", "3"])
    assert excinfo.value.code == cli_module.EXIT_USAGE
    assert "required" in capsys.readouterr().err


def test_no_command_prints_help(capsys) -> None:  # noqa: ANN001
    assert ezfowler.main([]) == 0
    assert "usage: ezfowler" in capsys.readouterr().out


def test_version_flag(capsys) -> None:  # noqa: ANN001
    with pytest.raises(SystemExit) as excinfo:
        cli_module.main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.startswith("ezfowler ")


def test_scan_writes_table_and_bracket(tmp_path: Path, capsys) -> None:  # noqa: ANN001
    out = tmp_path / "scan.csv"
    code = cli_module._run_scan(3, 1.0, 4.5, 9.0, 2, grid=128, out=str(out))
    assert code == cli_module.EXIT_OK
    assert capsys.readouterr().out.strip() == "T* in [4.5,9]"
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "T,J_const,J_max,variant"
    assert lines[1].endswith(",constant")
    assert lines[2].endswith(",nonconstant")


def test_scan_without_transition(capsys) -> None:  # noqa: ANN001
    assert cli_module._run_scan(3, 1.0, 2.0, 3.0, 2, grid=64) == cli_module.EXIT_OK
    assert capsys.readouterr().out.strip().endswith("no transition in range")


@pytest.mark.parametrize(("t_min", "t_max", "steps"), [(5.0, 4.0, 3), (0.0, 4.0, 3), (1.0, 4.0, 1)])
def test_scan_rejects_bad_range(t_min: float, t_max: float, steps: int, capsys) -> None:  # noqa: ANN001
    assert cli_module._run_scan(3, 1.0, t_min, t_max, steps) == cli_module.EXIT_USAGE
    assert capsys.readouterr().err.startswith("error:")
