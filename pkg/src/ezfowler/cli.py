from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from contextlib import contextmanager
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import IO, Iterator, Sequence

import numpy as np

from .errors import FowlerError, NonConvergenceError
from .files import build_solution_file, format_float, read_solution, write_solution, write_table
from .kernel import Params, eval_K_many, periodize
from .radial import reconstruct
from .solver import PeriodicProfile, SolverOptions, scan_threshold, solve, solve_subcritical
from .suites import SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONCONVERGENCE = 2
EXIT_VERIFY_FAILED = 3


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _package_version() -> str:
    try:
        return version("ezfowler")
    except PackageNotFoundError:
        return "0.0.0"


def _add_params(parser: argparse.ArgumentParser, *, required: bool = True) -> None:
    parser.add_argument("--n", type=int, required=required, help="Dimension n >= 1.")
    parser.add_argument("--sigma", type=float, required=required, help="Order sigma in (0, n/2).")


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="ezfowler",
        description="Compute periodic Fowler solutions and check their identities.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {_package_version()}",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress to stderr (-v info, -vv debug).",
    )
    subparsers = parser.add_subparsers(dest="command")

    solve_parser = subparsers.add_parser("solve", help="Maximize J_T for one period.")
    _add_params(solve_parser)
    solve_parser.add_argument("--period", type=float, required=True, help="Period T > 0.")
    solve_parser.add_argument("--grid", type=int, default=1024, help="Grid size N (even, >= 8).")
    solve_parser.add_argument("--tol", type=float, default=1e-10, help="Fixed-point step tolerance.")
    solve_parser.add_argument("--max-iters", type=int, default=100_000, help="Iteration budget.")
    solve_parser.add_argument(
        "--subcritical-p",
        type=float,
        default=None,
        help="Solve the n = 1 subcritical problem with this exponent instead.",
    )
    solve_parser.add_argument("--out", default=None, help="Path of the JSON solution file.")
    solve_parser.add_argument(
        "--stamp",
        action="store_true",
        help="Record the wall-clock time in the file (outputs are then not reproducible).",
    )

    scan_parser = subparsers.add_parser("scan", help="Locate the symmetry-breaking period T*.")
    _add_params(scan_parser)
    scan_parser.add_argument("--t-min", type=float, required=True, help="Smallest period.")
    scan_parser.add_argument("--t-max", type=float, required=True, help="Largest period.")
    scan_parser.add_argument("--steps", type=int, required=True, help="Number of log-spaced periods.")
    scan_parser.add_argument("--grid", type=int, default=512, help="Grid size N.")
    scan_parser.add_argument("--tol", type=float, default=1e-10, help="Fixed-point step tolerance.")
    scan_parser.add_argument("--max-iters", type=int, default=100_000, help="Iteration budget.")
    scan_parser.add_argument("--workers", type=int, default=1, help="Periods solved concurrently.")
    scan_parser.add_argument("--out", default=None, help="CSV path (stdout when omitted).")

    verify_parser = subparsers.add_parser("verify", help="Run a verification suite.")
    verify_parser.add_argument(
        "--suite",
        required=True,
        choices=(*SUITES, "all"),
        help="Suite to run.",
    )
    _add_params(verify_parser, required=False)
    verify_parser.add_argument("--solution", default=None, help="Solution file for the pohozaev suite.")
    verify_parser.add_argument("--seed", type=int, default=0, help="Seed for Monte Carlo checks.")
    verify_parser.add_argument("--json", dest="json_path", default=None, help="Also write a JSON report.")

    reconstruct_parser = subparsers.add_parser("reconstruct", help="Sample the radial solution u(r).")
    reconstruct_parser.add_argument("--solution", required=True, help="Solution JSON file.")
    reconstruct_parser.add_argument("--r-min", type=float, required=True, help="Smallest radius in (0, 1).")
    reconstruct_parser.add_argument("--samples", type=int, default=None, help="Number of radii.")
    reconstruct_parser.add_argument("--out", default=None, help="CSV path (stdout when omitted).")

    dump_parser = subparsers.add_parser("kernel-dump", help="Emit K and K_T on the lag grid as CSV.")
    _add_params(dump_parser)
    dump_parser.add_argument("--period", type=float, required=True, help="Period T > 0.")
    dump_parser.add_argument("--grid", type=int, default=1024, help="Grid size N.")
    dump_parser.add_argument("--out", default=None, help="CSV path (stdout when omitted).")
    return parser


@contextmanager
def _output(path: str | None) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as stream:
        yield stream


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _params_or_error(n: int | None, sigma: float | None) -> Params | None:
    if n is None and sigma is None:
        return None
    if n is None or sigma is None:
        raise ValueError("--n and --sigma must be given together")
    return Params(n, sigma)


def _run_solve(
    n: int,
    sigma: float,
    period: float,
    *,
    grid: int = 1024,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    subcritical_p: float | None = None,
    out: str | None = None,
    stamp: bool = False,
) -> int:
    try:
        params = Params(n, sigma)
        opts = SolverOptions(tol_fp=tol, max_iters=max_iters)
        table = periodize(params, period, grid)
    except (FowlerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    code = EXIT_OK
    try:
        if subcritical_p is None:
            solution = solve(params, period, grid, opts, table=table)
        else:
            solution = solve_subcritical(table, subcritical_p, PeriodicProfile.bump(period, grid), opts)
    except NonConvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        if exc.partial is None:
            return EXIT_NONCONVERGENCE
        solution = exc.partial
        code = EXIT_NONCONVERGENCE
    except (FowlerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else EXIT_NONCONVERGENCE

    if out is not None:
        record = build_solution_file(params, solution, opts, tool_version=_package_version(), stamp=stamp)
        write_solution(out, record)
    print(
        f"T={format_float(solution.period)} J={format_float(solution.J_value)} "
        f"variant={solution.variant} residual={format_float(solution.el_residual)}"
    )
    return code


def _run_scan(
    n: int,
    sigma: float,
    t_min: float,
    t_max: float,
    steps: int,
    *,
    grid: int = 512,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    workers: int = 1,
    out: str | None = None,
) -> int:
    if not (0.0 < t_min < t_max and math.isfinite(t_max)):
        print(f"error: invalid period range: [{t_min!r}, {t_max!r}]", file=sys.stderr)
        return EXIT_USAGE
    if steps < 2:
        print(f"error: steps must be at least 2: {steps!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        params = Params(n, sigma)
        opts = SolverOptions(tol_fp=tol, max_iters=max_iters)
        scan = scan_threshold(params, np.geomspace(t_min, t_max, steps), grid, opts, workers=workers)
    except NonConvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (FowlerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    rows = [(r.period, r.J_constant, r.J_max, r.variant) for r in scan.records]
    with _output(out) as stream:
        write_table(stream, ("T", "J_const", "J_max", "variant"), rows)
    if scan.bracket is None:
        print("no transition in range")
    else:
        low, high = scan.bracket
        print(f"T* in [{format_float(low)},{format_float(high)}]")
    return EXIT_OK


def _run_verify(
    suite: str,
    *,
    n: int | None = None,
    sigma: float | None = None,
    solution: str | None = None,
    seed: int = 0,
    json_path: str | None = None,
) -> int:
    try:
        params = _params_or_error(n, sigma)
        checks = run_suite(suite, params, solution=solution, seed=seed)
    except (FowlerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    for check in checks:
        print(check.line())
    if json_path is not None:
        report = {"suite": suite, "checks": [check.as_dict() for check in checks]}
        Path(json_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    failed = sum(1 for check in checks if not check.passed)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY_FAILED


def _run_reconstruct(
    solution: str,
    r_min: float,
    *,
    samples: int | None = None,
    out: str | None = None,
) -> int:
    try:
        record = read_solution(solution)
        field = reconstruct(record.params, record.to_solution(), r_min, samples)
    except (FowlerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    psi = field.psi(field.log_radii)
    rows = zip(field.radii, field.u_values, psi)
    with _output(out) as stream:
        write_table(stream, ("r", "u", "psi_of_log_r"), ((float(r), float(u), float(p)) for r, u, p in rows))
    return EXIT_OK


def _run_kernel_dump(
    n: int,
    sigma: float,
    period: float,
    *,
    grid: int = 1024,
    out: str | None = None,
) -> int:
    try:
        params = Params(n, sigma)
        table = periodize(params, period, grid)
    except (FowlerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    # lag 0 holds the mass-matched cell value, not K_T(0)
    lags = np.arange(1, table.grid_size)
    t = table.step * lags
    values = eval_K_many(params, t)
    rows = ((float(a), float(b), float(c)) for a, b, c in zip(t, values, table.lag_values[1:]))
    with _output(out) as stream:
        write_table(stream, ("t", "K", "K_T"), rows)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(int(args.verbose))

    if args.command == "solve":
        return _run_solve(
            args.n,
            args.sigma,
            args.period,
            grid=args.grid,
            tol=args.tol,
            max_iters=args.max_iters,
            subcritical_p=args.subcritical_p,
            out=args.out,
            stamp=bool(args.stamp),
        )
    if args.command == "scan":
        return _run_scan(
            args.n,
            args.sigma,
            args.t_min,
            args.t_max,
            args.steps,
            grid=args.grid,
            tol=args.tol,
            max_iters=args.max_iters,
            workers=args.workers,
            out=args.out,
        )
    if args.command == "verify":
        return _run_verify(
            args.suite,
            n=args.n,
            sigma=args.sigma,
            solution=args.solution,
            seed=args.seed,
            json_path=args.json_path,
        )
    if args.command == "reconstruct":
        return _run_reconstruct(args.solution, args.r_min, samples=args.samples, out=args.out)
    if args.command == "kernel-dump":
        return _run_kernel_dump(args.n, args.sigma, args.period, grid=args.grid, out=args.out)

    parser.print_help()
    return EXIT_OK
