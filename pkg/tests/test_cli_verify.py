from __future__ import annotations

import json
from pathlib import Path

import pytest

import ezfowler.cli as cli_module
from ezfowler.suites import KERNEL_PARAMS, Check, run_suite


def test_verify_kernel_suite_passes(tmp_path: Path, capsys) -> None:  # noqa: ANN001
    report = tmp_path / "report.json"
    code = cli_module.main(["verify", "--suite", "kernel", "--n", "3", "--sigma", "1", "--json", str(report)])
    assert code == cli_module.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert all(line.startswith("PASS ") for line in lines[:-1])
    assert lines[-1] == f"{len(lines) - 1}/{len(lines) - 1} checks passed"
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert payload["suite"] == "kernel"
    assert all(check["passed"] for check in payload["checks"])


def test_verify_default_kernel_suite_covers_every_pair(capsys) -> None:  # noqa: ANN001
    assert cli_module.main(["verify", "--suite", "kernel"]) == cli_module.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert all(line.startswith("PASS ") for line in lines[:-1])
    for n, sigma in KERNEL_PARAMS:
        assert 0.0 < sigma < n / 2.0
        assert any(f"kernel[n={n},sigma={sigma:g}]." in line for line in lines)


def test_verify_failure_exit_code(monkeypatch, capsys) -> None:  # noqa: ANN001
    checks = [Check("a", 0.0, 1.0, True), Check("b", 2.0, 1.0, False)]
    monkeypatch.setattr(cli_module, "run_suite", lambda *_args, **_kwargs: checks)
    assert cli_module._run_verify("kernel") == cli_module.EXIT_VERIFY_FAILED
    out = capsys.readouterr().out
    assert "FAIL b: measured=2.000000e+00 tolerance=1.000000e+00" in out
    assert out.strip().endswith("1/2 checks passed")


def test_verify_needs_both_parameters(capsys) -> None:  # noqa: ANN001
    assert cli_module._run_verify("kernel", n=3) == cli_module.EXIT_USAGE
    assert "--n and --sigma" in capsys.readouterr().err


def test_verify_rejects_unknown_suite() -> None:
    with pytest.raises(SystemExit) as excinfo:
        cli_module.main(["verify", "--suite", "nope"])
    assert excinfo.value.code == cli_module.EXIT_USAGE


def test_unknown_suite_in_library() -> None:
    with pytest.raises(ValueError, match="unsupported suite"):
        run_suite("nope")


def test_pohozaev_suite_on_solution_file(tmp_path: Path, capsys) -> None:  # noqa: ANN001
    out = tmp_path / "solution.json"
    assert cli_module._run_solve(3, 1.0, 10.0, grid=1024, out=str(out)) == cli_module.EXIT_OK
    capsys.readouterr()
    assert cli_module._run_verify("pohozaev", solution=str(out)) == cli_module.EXIT_OK
    assert "PASS pohozaev.solution_spread" in capsys.readouterr().out


def test_hls_suite_rejects_higher_dimension(capsys) -> None:  # noqa: ANN001
    assert cli_module._run_verify("hls", n=3, sigma=1.0) == cli_module.EXIT_USAGE
    assert "n = 1" in capsys.readouterr().err
