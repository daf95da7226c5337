from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .errors import DegenerateProfileError, DomainError, NonConvergenceError
from .kernel import KernelTable, Params, TABLE_TOL, periodize

logger = logging.getLogger(__name__)

Variant = Literal["constant", "nonconstant"]

_MASS_FLOOR = 1e-300
_ASCENT_SLACK = 1e-14
_DISAGREEMENT_TOL = 1e-8
_CONTINUATION_STEPS = 13
_BUMP_FRACTION = 0.1


@dataclass(frozen=True)
class SolverOptions:
    tol_fp: float = 1e-10
    tol_J: float = 1e-12
    max_iters: int = 100_000
    min_theta: float = 2.0**-20
    variant_threshold: float = 1e-4
    log_every: int = 500

    def __post_init__(self) -> None:
        if not (self.tol_fp > 0.0 and self.tol_J > 0.0):
            raise ValueError(f"tolerances must be positive: {self.tol_fp!r}, {self.tol_J!r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be positive: {self.max_iters!r}")


@dataclass(frozen=True, eq=False)
class PeriodicProfile:
    """Samples ``f(j T / N)`` of a nonnegative T-periodic function."""

    period: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 8:
            raise ValueError(f"profile needs a 1-D array of at least 8 samples: {values.shape!r}")
        if not (self.period > 0.0 and math.isfinite(self.period)):
            raise ValueError(f"period must be positive: {self.period!r}")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise DomainError("profile values must be finite and nonnegative")
        values.flags.writeable = False
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "values", values)

    @property
    def grid_size(self) -> int:
        return int(self.values.size)

    @property
    def step(self) -> float:
        return self.period / self.grid_size

    @property
    def nodes(self) -> np.ndarray:
        return self.step * np.arange(self.grid_size)

    @classmethod
    def constant(cls, period: float, grid_size: int, value: float = 1.0) -> PeriodicProfile:
        return cls(period, np.full(grid_size, float(value)))

    @classmethod
    def bump(cls, period: float, grid_size: int, width: float | None = None) -> PeriodicProfile:
        """Gaussian bump centred at ``T/2`` (default width ``T/10``)."""
        width = _BUMP_FRACTION * period if width is None else width
        t = period * np.arange(grid_size) / grid_size
        return cls(period, np.exp(-(((t - period / 2.0) / width) ** 2)))

    def rotated(self, shift: int) -> PeriodicProfile:
        return PeriodicProfile(self.period, np.roll(self.values, shift))


@dataclass(frozen=True, eq=False)
class FowlerSolution:
    """A converged profile ``psi`` of ``psi = K_T * psi^power`` and its diagnostics."""

    profile: PeriodicProfile
    J_value: float
    el_residual: float
    iterations: int
    variant: Variant
    multiplier: float
    power: float
    converged: bool = True
    history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def period(self) -> float:
        return self.profile.period

    @property
    def grid_size(self) -> int:
        return self.profile.grid_size


def _check_grid(table: KernelTable, profile: PeriodicProfile) -> None:
    if profile.grid_size != table.grid_size or not math.isclose(
        profile.period, table.period, rel_tol=1e-12
    ):
        raise ValueError(
            f"grid mismatch: table (T={table.period!r}, N={table.grid_size!r}) vs "
            f"profile (T={profile.period!r}, N={profile.grid_size!r})"
        )


def _norm(values: np.ndarray, exponent: float, step: float) -> float:
    return float((step * np.sum(values**exponent)) ** (1.0 / exponent))


def J_T(table: KernelTable, f: PeriodicProfile, exponent: float | None = None) -> float:
    """Discrete Rayleigh quotient ``<f, K_T * f> / ||f||_r^2``.

    ``exponent`` is the norm exponent ``r``; it defaults to the critical
    ``q = 2n/(n + 2 sigma)``. The subcritical functional uses ``r = p + 1``.
    """
    _check_grid(table, f)
    r = table.params.q_norm if exponent is None else exponent
    norm = _norm(f.values, r, table.step)
    if not norm > 0.0:
        raise DegenerateProfileError("J_T is undefined for the zero profile")
    numerator = table.step * float(np.dot(f.values, table.convolve(f.values)))
    return numerator / norm**2


def el_residual(table: KernelTable, psi: np.ndarray, power: float) -> float:
    """``max |psi - K_T * psi^power| / max psi`` on the table grid."""
    psi = np.asarray(psi, dtype=float)
    top = float(np.max(psi))
    if not top > 0.0:
        raise DegenerateProfileError("residual is undefined for the zero profile")
    return float(np.max(np.abs(psi - table.convolve(psi**power)))) / top


def _normalized(values: np.ndarray, exponent: float, step: float) -> np.ndarray:
    norm = _norm(values, exponent, step)
    if not norm > _MASS_FLOOR:
        raise DegenerateProfileError(f"iterate mass collapsed: {norm!r}")
    return values / norm


def _finish(
    table: KernelTable,
    f: np.ndarray,
    g: np.ndarray,
    exponent: float,
    iterations: int,
    history: list[float],
    opts: SolverOptions,
    converged: bool,
) -> FowlerSolution:
    power = 1.0 / (exponent - 1.0)
    # K_T * f = c0 f^{r-1}; psi = lambda f^{r-1} then solves psi = K_T * psi^power
    shape = f ** (exponent - 1.0)
    multiplier = float(np.dot(g, shape) / np.dot(shape, shape))
    scale = multiplier ** (-1.0 / (power - 1.0))
    psi = scale * shape
    psi = np.roll(psi, table.grid_size // 2 - int(np.argmax(psi)))
    top, bottom = float(np.max(psi)), float(np.min(psi))
    variant: Variant = "nonconstant" if (top - bottom) / top > opts.variant_threshold else "constant"
    return FowlerSolution(
        profile=PeriodicProfile(table.period, psi),
        J_value=history[-1],
        el_residual=el_residual(table, psi, power),
        iterations=iterations,
        variant=variant,
        multiplier=multiplier,
        power=power,
        converged=converged,
        history=tuple(history),
    )


def _ascend(
    table: KernelTable,
    init: PeriodicProfile,
    exponent: float,
    opts: SolverOptions,
) -> FowlerSolution:
    _check_grid(table, init)
    h = table.step
    power = 1.0 / (exponent - 1.0)
    f = _normalized(np.asarray(init.values, dtype=float), exponent, h)
    g = table.convolve(f)
    J = h * float(np.dot(f, g))
    history = [J]
    for iteration in range(1, opts.max_iters + 1):
        raw = _normalized(np.maximum(g, 0.0) ** power, exponent, h)
        theta = 1.0
        while True:
            candidate = raw if theta == 1.0 else _normalized((1.0 - theta) * f + theta * raw, exponent, h)
            g_candidate = table.convolve(candidate)
            J_candidate = h * float(np.dot(candidate, g_candidate))
            if J_candidate >= J - _ASCENT_SLACK * abs(J):
                break
            theta /= 2.0
            if theta < opts.min_theta:
                partial = _finish(table, f, g, exponent, iteration, history, opts, False)
                raise NonConvergenceError(
                    f"damping stalled at iteration {iteration} (J={J!r})", partial=partial
                )
        step = float(np.max(np.abs(candidate - f))) / float(np.max(candidate))
        delta_J = J_candidate - J
        f, g, J = candidate, g_candidate, J_candidate
        history.append(J)
        if iteration % opts.log_every == 0:
            logger.debug("iteration %d: J=%.17g step=%.3e theta=%g", iteration, J, step, theta)
        if step < opts.tol_fp:
            return _finish(table, f, g, exponent, iteration, history, opts, True)
        if abs(delta_J) < opts.tol_J * abs(J):
            trial = _finish(table, f, g, exponent, iteration, history, opts, True)
            if trial.el_residual < 100.0 * opts.tol_fp:
                return trial
    partial = _finish(table, f, g, exponent, opts.max_iters, history, opts, False)
    raise NonConvergenceError(
        f"no convergence after {opts.max_iters} iterations (residual={partial.el_residual:.3e})",
        partial=partial,
    )


def maximize(
    table: KernelTable, init: PeriodicProfile, opts: SolverOptions | None = None
) -> FowlerSolution:
    """Maximize the critical J_T from ``init`` by the normalized power method.

    Each step maps ``f`` to ``(K_T * f)^p`` renormalized in ``L^q``; when a
    raw step lowers J it is damped toward the current iterate by halving
    ``theta``. The returned profile is the rescaled solution ``psi`` of
    ``psi = K_T * psi^p``, rotated so that its maximum sits at ``T/2``.

    Raises:
        NonConvergenceError: On ``max_iters`` or a damping stall; the last
            iterate is attached as ``partial``.
        DegenerateProfileError: If the iterate collapses to zero.
    """
    opts = opts or SolverOptions()
    solution = _ascend(table, init, table.params.q_norm, opts)
    logger.info(
        "maximize T=%g N=%d: J=%.12g variant=%s iterations=%d residual=%.2e",
        table.period,
        table.grid_size,
        solution.J_value,
        solution.variant,
        solution.iterations,
        solution.el_residual,
    )
    return solution


def subcritical_exponents(params: Params, steps: int = _CONTINUATION_STEPS) -> list[float]:
    """Continuation exponents ``crit * (1 + 2^-i)`` for ``i = 0 .. steps-1``."""
    critical = _line_critical(params)
    return [critical * (1.0 + 2.0**-i) for i in range(steps)]


def _line_critical(params: Params) -> float:
    if params.n != 1:
        raise DomainError(f"subcritical problem is defined for n = 1 only: {params.n!r}")
    return (1.0 - 2.0 * params.sigma) / (1.0 + 2.0 * params.sigma)


def solve_subcritical(
    table: KernelTable, p: float, init: PeriodicProfile, opts: SolverOptions | None = None
) -> FowlerSolution:
    """Maximize ``J_{T,p}``, whose denominator uses the ``L^{p+1}`` norm."""
    critical = _line_critical(table.params)
    if not p > critical:
        raise DomainError(f"p must exceed the critical value {critical!r}: {p!r}")
    if math.isclose(p, 1.0, rel_tol=0.0, abs_tol=1e-12):
        raise DomainError("p = 1 is linear and fixes no scale")
    return _ascend(table, init, p + 1.0, opts or SolverOptions())


def _warm_start(solution: FowlerSolution) -> PeriodicProfile:
    # psi^power is proportional to the maximizer f
    return PeriodicProfile(solution.period, solution.profile.values**solution.power)


def _solve_from(table: KernelTable, init: PeriodicProfile, opts: SolverOptions) -> FowlerSolution:
    if table.params.n == 1:
        for p in subcritical_exponents(table.params):
            if math.isclose(p, 1.0, rel_tol=0.0, abs_tol=1e-12):
                continue
            init = _warm_start(solve_subcritical(table, p, init, opts))
    return maximize(table, init, opts)


def solve(
    params: Params,
    T: float,
    N: int = 1024,
    opts: SolverOptions | None = None,
    *,
    table: KernelTable | None = None,
    tol: float = TABLE_TOL,
) -> FowlerSolution:
    """Solve for period ``T`` from a constant and a bump start; keep the larger J.

    For ``n = 1`` each start is first carried through the subcritical
    continuation before the critical solve.
    """
    opts = opts or SolverOptions()
    table = table or periodize(params, T, N, tol)
    solutions: list[FowlerSolution] = []
    failure: NonConvergenceError | None = None
    for init in (PeriodicProfile.constant(table.period, table.grid_size), PeriodicProfile.bump(table.period, table.grid_size)):
        try:
            solutions.append(_solve_from(table, init, opts))
        except NonConvergenceError as exc:
            logger.warning("solve T=%g: one start did not converge: %s", table.period, exc)
            failure = exc
    if not solutions:
        assert failure is not None
        raise failure
    best = max(solutions, key=lambda s: s.J_value)
    if len(solutions) == 2:
        low, high = sorted(s.J_value for s in solutions)
        if high - low > _DISAGREEMENT_TOL * high:
            logger.warning(
                "solve T=%g: starts disagree (J=%.12g vs %.12g); keeping the larger",
                table.period,
                low,
                high,
            )
    return best


@dataclass(frozen=True)
class ScanRecord:
    period: float
    J_constant: float
    J_max: float
    variant: Variant
    el_residual: float


@dataclass(frozen=True)
class ThresholdScan:
    records: tuple[ScanRecord, ...]
    bracket: tuple[float, float] | None

    @property
    def estimate(self) -> float | None:
        if self.bracket is None:
            return None
        return 0.5 * (self.bracket[0] + self.bracket[1])

    @property
    def flips(self) -> int:
        return sum(
            1 for a, b in zip(self.records, self.records[1:]) if a.variant != b.variant
        )


def scan_threshold(
    params: Params,
    periods: Iterable[float],
    N: int = 1024,
    opts: SolverOptions | None = None,
    *,
    workers: int = 1,
) -> ThresholdScan:
    """Solve at each period and bracket the constant to nonconstant transition."""
    periods = [float(T) for T in periods]
    if not periods:
        raise ValueError("period range is empty")
    if any(b <= a for a, b in zip(periods, periods[1:])):
        raise ValueError(f"periods must be strictly increasing: {periods!r}")
    opts = opts or SolverOptions()

    def run(T: float) -> ScanRecord:
        table = periodize(params, T, N)
        constant = J_T(table, PeriodicProfile.constant(T, N))
        best = solve(params, T, N, opts, table=table)
        logger.info("scan T=%g: J_const=%.12g J_max=%.12g %s", T, constant, best.J_value, best.variant)
        return ScanRecord(T, constant, best.J_value, best.variant, best.el_residual)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = tuple(pool.map(run, periods))
    else:
        records = tuple(run(T) for T in periods)
    bracket = None
    for a, b in zip(records, records[1:]):
        if a.variant == "constant" and b.variant == "nonconstant":
            bracket = (a.period, b.period)
            break
    if bracket is None:
        logger.info("scan: no transition in range")
    else:
        logger.info("scan: T* in [%g, %g]", *bracket)
    return ThresholdScan(records, bracket)
