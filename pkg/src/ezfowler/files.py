from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Any, Iterable, Sequence

import numpy as np

from .kernel import Params, TABLE_TOL
from .solver import FowlerSolution, PeriodicProfile, SolverOptions

SCHEMA_VERSION = 1
_FLOAT_FORMAT = ".17g"
_VARIANTS = ("constant", "nonconstant")


@dataclass(frozen=True)
class SolutionFile:
    """On-disk form of a :class:`FowlerSolution` (JSON, schema version 1)."""

    n: int
    sigma: float
    period: float
    grid_size: int
    psi_values: tuple[float, ...] = field(repr=False)
    J_value: float
    el_residual: float
    variant: str
    power: float
    multiplier: float
    provenance: dict[str, Any]
    schema_version: int = SCHEMA_VERSION

    @property
    def params(self) -> Params:
        return Params(self.n, self.sigma)

    def to_solution(self) -> FowlerSolution:
        return FowlerSolution(
            profile=PeriodicProfile(self.period, np.asarray(self.psi_values)),
            J_value=self.J_value,
            el_residual=self.el_residual,
            iterations=int(self.provenance.get("iterations", 0)),
            variant=self.variant,  # type: ignore[arg-type]
            multiplier=self.multiplier,
            power=self.power,
            converged=bool(self.provenance.get("converged", True)),
        )


def build_solution_file(
    params: Params,
    solution: FowlerSolution,
    opts: SolverOptions,
    *,
    tool_version: str,
    table_tol: float = TABLE_TOL,
    stamp: bool = False,
) -> SolutionFile:
    provenance = {
        "tol_fp": opts.tol_fp,
        "tol_J": opts.tol_J,
        "max_iters": opts.max_iters,
        "table_tol": table_tol,
        "iterations": solution.iterations,
        "converged": solution.converged,
        "timestamp": datetime.now(timezone.utc).isoformat() if stamp else None,
        "tool_version": tool_version,
    }
    return SolutionFile(
        n=params.n,
        sigma=params.sigma,
        period=solution.period,
        grid_size=solution.grid_size,
        psi_values=tuple(float(v) for v in solution.profile.values),
        J_value=solution.J_value,
        el_residual=solution.el_residual,
        variant=solution.variant,
        power=solution.power,
        multiplier=solution.multiplier,
        provenance=provenance,
    )


def write_solution(path: str | Path, record: SolutionFile) -> None:
    payload = asdict(record)
    payload["psi_values"] = list(record.psi_values)
    ordered = {"schema_version": payload.pop("schema_version"), **payload}
    Path(path).write_text(json.dumps(ordered, indent=2) + "\n", encoding="utf-8")


def read_solution(path: str | Path) -> SolutionFile:
    """Load a solution file.

    Raises:
        ValueError: If the file is unreadable, of another schema version or
            internally inconsistent.
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"failed to read solution file {str(path)!r}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValueError(f"solution file is not a JSON object: {str(path)!r}")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema: {version!r}")
    try:
        record = SolutionFile(
            n=int(payload["n"]),
            sigma=float(payload["sigma"]),
            period=float(payload["period"]),
            grid_size=int(payload["grid_size"]),
            psi_values=tuple(float(v) for v in payload["psi_values"]),
            J_value=float(payload["J_value"]),
            el_residual=float(payload["el_residual"]),
            variant=str(payload["variant"]),
            power=float(payload["power"]),
            multiplier=float(payload["multiplier"]),
            provenance=dict(payload.get("provenance") or {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed solution file {str(path)!r}: {exc}") from exc
    if record.variant not in _VARIANTS:
        raise ValueError(f"unsupported variant: {record.variant!r}")
    if len(record.psi_values) != record.grid_size:
        raise ValueError(
            f"psi_values has {len(record.psi_values)} entries, expected {record.grid_size}"
        )
    return record


def format_float(value: float) -> str:
    return format(float(value), _FLOAT_FORMAT)


def write_table(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """CSV with floats printed to 17 significant digits."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
