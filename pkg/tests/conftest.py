from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))


@pytest.fixture
def constant_solution_file(tmp_path: Path) -> Path:
    """Solution file for the constant Fowler solution of (n, sigma) = (3, 1) at T = 2."""
    import ezfowler.cli as cli_module

    path = tmp_path / "constant.json"
    assert cli_module._run_solve(3, 1.0, 2.0, grid=64, out=str(path)) == cli_module.EXIT_OK
    return path
