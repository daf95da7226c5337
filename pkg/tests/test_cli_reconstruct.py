from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

import ezfowler.cli as cli_module
from ezfowler.files import read_solution
from ezfowler.kernel import periodize
from ezfowler.radial import radial_residual, reconstruct
from tests._fowler_helpers import ODE_CONSTANT_PSI, ode_periodic_kernel


def test_reconstruct_writes_radial_table(constant_solution_file: Path, tmp_path: Path) -> None:
    out = tmp_path / "field.csv"
    code = cli_module._run_reconstruct(str(constant_solution_file), 0.01, samples=11, out=str(out))
    assert code == cli_module.EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "r,u,psi_of_log_r"
    assert len(lines) == 12
    r, u, psi = (float(v) for v in lines[-1].split(","))
    assert r == pytest.approx(0.01, rel=1e-12)
    assert psi == pytest.approx(ODE_CONSTANT_PSI, rel=1e-9)
    assert u == pytest.approx(ODE_CONSTANT_PSI / math.sqrt(0.01), rel=1e-9)


def test_reconstruct_reports_missing_file(tmp_path: Path, capsys) -> None:  # noqa: ANN001
    code = cli_module._run_reconstruct(str(tmp_path / "missing.json"), 0.1)
    assert code == cli_module.EXIT_USAGE
    assert "failed to read" in capsys.readouterr().err


def test_reconstruct_rejects_bad_radius(constant_solution_file: Path, capsys) -> None:  # noqa: ANN001
    assert cli_module._run_reconstruct(str(constant_solution_file), 1.5) == cli_module.EXIT_USAGE
    assert "r_min" in capsys.readouterr().err


def test_kernel_dump(tmp_path: Path) -> None:
    out = tmp_path / "kernel.csv"
    assert cli_module._run_kernel_dump(3, 1.0, 4.0, grid=16, out=str(out)) == cli_module.EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,K,K_T"
    assert len(lines) == 16
    t, k, k_t = (float(v) for v in lines[1].split(","))
    assert t == 0.25
    assert k == pytest.approx(4.0 * math.pi * math.exp(-0.125), rel=1e-10)
    assert k_t == pytest.approx(float(ode_periodic_kernel(t, 4.0)), rel=1e-8)


def test_kernel_dump_rejects_bad_sigma(capsys) -> None:  # noqa: ANN001
    assert cli_module._run_kernel_dump(1, 0.5, 4.0) == cli_module.EXIT_USAGE
    assert capsys.readouterr().err.startswith("error:")


def test_reconstruct_rejects_other_schema(constant_solution_file: Path, capsys) -> None:  # noqa: ANN001
    payload = json.loads(constant_solution_file.read_text(encoding="utf-8"))
    payload["schema_version"] = 2
    constant_solution_file.write_text(json.dumps(payload), encoding="utf-8")
    assert cli_module._run_reconstruct(str(constant_solution_file), 0.1) == cli_module.EXIT_USAGE
    assert "unsupported schema" in capsys.readouterr().err


def test_reconstruct_is_deterministic(constant_solution_file: Path, tmp_path: Path) -> None:
    outputs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for out in outputs:
        assert cli_module._run_reconstruct(str(constant_solution_file), 0.05, out=str(out)) == cli_module.EXIT_OK
    assert outputs[0].read_bytes() == outputs[1].read_bytes()


def test_solution_file_round_trip_keeps_residual(tmp_path: Path) -> None:
    path = tmp_path / "fowler.json"
    assert cli_module._run_solve(3, 1.0, 10.0, grid=256, out=str(path)) == cli_module.EXIT_OK
    record = read_solution(path)
    assert record.variant == "nonconstant"
    field = reconstruct(record.params, record.to_solution(), 1e-5)
    table = periodize(record.params, 10.0, 256)
    assert radial_residual(record.params, field, table) == pytest.approx(record.el_residual, abs=1e-12)
