from __future__ import annotations

from typing import Sequence

from .errors import (
    AccuracyError,
    DegenerateProfileError,
    DomainError,
    FowlerError,
    NonConvergenceError,
)
from .kernel import (
    KernelAsymptotics,
    KernelTable,
    K_asymptotics,
    Params,
    bifurcation_period,
    eval_K,
    kernel_mass,
    kernel_second_moment,
    kernel_symbol,
    periodize,
    poisson_kernel,
    riesz_kernel,
)
from .radial import RadialField, RateBounds, radial_residual, rate_bounds, reconstruct
from .render import plot_field, plot_profile
from .solver import (
    FowlerSolution,
    J_T,
    PeriodicProfile,
    SolverOptions,
    ThresholdScan,
    maximize,
    scan_threshold,
    solve,
    solve_subcritical,
)
from . import greens, verify

__all__ = [
    "Params",
    "KernelTable",
    "KernelAsymptotics",
    "eval_K",
    "K_asymptotics",
    "kernel_mass",
    "kernel_second_moment",
    "kernel_symbol",
    "bifurcation_period",
    "periodize",
    "riesz_kernel",
    "poisson_kernel",
    "PeriodicProfile",
    "FowlerSolution",
    "SolverOptions",
    "ThresholdScan",
    "J_T",
    "maximize",
    "solve",
    "solve_subcritical",
    "scan_threshold",
    "RadialField",
    "RateBounds",
    "reconstruct",
    "rate_bounds",
    "radial_residual",
    "plot_profile",
    "plot_field",
    "greens",
    "verify",
    "FowlerError",
    "DomainError",
    "AccuracyError",
    "DegenerateProfileError",
    "NonConvergenceError",
]


def main(argv: Sequence[str] | None = None) -> int:
    from ezfowler.cli import main as cli_main

    return cli_main(argv)
