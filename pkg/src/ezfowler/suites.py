from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import greens, verify
from .files import read_solution
from .kernel import (
    K_asymptotics,
    Params,
    eval_K,
    eval_K_many,
    kernel_mass,
    kernel_mass_by_quadrature,
    periodize,
    poisson_beta,
)
from .radial import reconstruct
from .solver import PeriodicProfile, SolverOptions, maximize

logger = logging.getLogger(__name__)

KERNEL_PARAMS: tuple[tuple[int, float], ...] = ((1, 0.25), (2, 0.3), (3, 0.5), (3, 1.4), (5, 2.3))
BUBBLE_PARAMS: tuple[tuple[int, float], ...] = ((1, 0.25), (3, 1.0))
_BUBBLE_SAMPLES = (0.0, 1.0, 3.0)
_EXTENSION_GRID = ((0.0, 0.5, 2.0), (0.5, 1.0, 2.0))
_HLS_PERIOD = 10.0
_HLS_LAMBDAS = (1e-2, 1e-3)
_FOWLER_PERIOD = 10.0
# 1e-3 is still inside the |t|^{1-2 sigma} correction for n = 1
_NEAR_ZERO_POINTS = (1e-5, 1e-6, 1e-7)
# regular part of G_2 at the centre of the unit ball in R^5: -(9/5) w_4 / (8 pi^2)^2
_G52_CENTER_REGULAR = -0.075 / math.pi**2


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: measured={self.measured:.6e} tolerance={self.tolerance:.6e}"

    def as_dict(self) -> dict[str, object]:
        return {"name": self.name, "measured": self.measured, "tolerance": self.tolerance, "passed": self.passed}


def _below(name: str, measured: float, tolerance: float) -> Check:
    return Check(name, float(measured), float(tolerance), bool(measured < tolerance))


def _above(name: str, measured: float, floor: float) -> Check:
    return Check(name, float(measured), float(floor), bool(measured > floor))


def _axis_point(n: int, coordinate: float) -> np.ndarray:
    point = np.zeros(n)
    point[0] = coordinate
    return point


def kernel_suite(params: Params | None = None, **_: object) -> list[Check]:
    pairs = [params] if params else [Params(n, s) for n, s in KERNEL_PARAMS]
    checks: list[Check] = []
    for p in pairs:
        tag = f"kernel[n={p.n},sigma={p.sigma:g}]"
        lags = (1e-3, 0.3, 1.0, 7.5)
        odd = max(abs(eval_K(p, t) - eval_K(p, -t)) for t in lags)
        checks.append(Check(f"{tag}.evenness", odd, 0.0, odd == 0.0))
        slope = (math.log(eval_K(p, 30.0)) - math.log(eval_K(p, 20.0))) / 10.0
        checks.append(_below(f"{tag}.decay_slope", abs(slope / -p.alpha - 1.0), 5e-3))
        asymptotics = K_asymptotics(p)
        if asymptotics.near_zero_law == "power":
            t = np.array(_NEAR_ZERO_POINTS)
            ratio = eval_K_many(p, t) / t**asymptotics.near_zero_exponent
            checks.append(_below(f"{tag}.near_zero_ratio", (ratio.max() - ratio.min()) / ratio.mean(), 1e-2))
        mass = kernel_mass(p)
        checks.append(_below(f"{tag}.mass_closed_form", abs(kernel_mass_by_quadrature(p) / mass - 1.0), 1e-7))
        table = periodize(p, 10.0, 512)
        checks.append(_below(f"{tag}.table_mass", abs(table.step * table.lag_values.sum() / mass - 1.0), 1e-6))
        if p.n == 1:
            checks.append(_above(f"{tag}.positive_mass_delta", verify.positive_mass_delta(p), 0.0))
    return checks


def pohozaev_suite(
    params: Params | None = None, solution: str | Path | None = None, **_: object
) -> list[Check]:
    checks: list[Check] = []
    if solution is not None:
        record = read_solution(solution)
        field = reconstruct(record.params, record.to_solution(), 0.5)
        fit = verify.fit_c_coef(record.params, field)
        report = verify.pohozaev_sigma1(record.params, field, fit.c_coef, verify.log_period_radii(field))
        checks.append(_below("pohozaev.solution_spread", report.spread, 1e-5))
        return checks
    p = params or Params(3, 1.0)
    constant = maximize(periodize(p, 2.0, 256), PeriodicProfile.constant(2.0, 256))
    field = reconstruct(p, constant, 0.01)
    fit = verify.fit_c_coef(p, field)
    report = verify.pohozaev_sigma1(p, field, fit.c_coef, np.geomspace(0.01, 0.9, 50))
    checks.append(_below("pohozaev.constant_spread", report.spread, 1e-6))
    opts = SolverOptions()
    table = periodize(p, _FOWLER_PERIOD, 1024)
    fowler = maximize(table, PeriodicProfile.bump(_FOWLER_PERIOD, 1024), opts)
    checks.append(Check("pohozaev.fowler_nonconstant", 1.0 if fowler.variant == "nonconstant" else 0.0, 1.0, fowler.variant == "nonconstant"))
    field = reconstruct(p, fowler, 0.5)
    fit = verify.fit_c_coef(p, field)
    report = verify.pohozaev_sigma1(p, field, fit.c_coef, verify.log_period_radii(field))
    checks.append(_below("pohozaev.fowler_spread", report.spread, 1e-5))
    bubble = verify.BubbleField(p)
    at_one = verify.pohozaev_sigma1(p, bubble, bubble.c_coef, [1.0]).values[0]
    checks.append(_below("pohozaev.bubble_at_1", abs(at_one), 1e-6))
    far = verify.pohozaev_sigma1(p, bubble, bubble.c_coef, [1e3]).values[0]
    checks.append(_below("pohozaev.bubble_far", abs(far), 1e-6))
    return checks


def bubble_suite(params: Params | None = None, **_: object) -> list[Check]:
    pairs = [params] if params else [Params(n, s) for n, s in BUBBLE_PARAMS]
    checks: list[Check] = []
    for p in pairs:
        tag = f"bubble[n={p.n},sigma={p.sigma:g}]"
        samples = [_axis_point(p.n, c) for c in _BUBBLE_SAMPLES]
        result = verify.check_bubble(p, 1.0, np.zeros(p.n), samples)
        checks.append(_below(f"{tag}.deviation", result.deviation, 1e-5))
        checks.append(_below(f"{tag}.beta", abs(result.beta_prime / poisson_beta(p) - 1.0), 1e-6))
    return checks


def extension_suite(params: Params | None = None, **_: object) -> list[Check]:
    p = params or Params(3, 0.5)
    worst = 0.0
    for radius in _EXTENSION_GRID[0]:
        for height in _EXTENSION_GRID[1]:
            worst = max(worst, verify.check_extension_identity(p, _axis_point(p.n, radius), height).rel_error)
    return [_below(f"extension[n={p.n},sigma={p.sigma:g}].max_rel_error", worst, 1e-6)]


def hls_suite(params: Params | None = None, **_: object) -> list[Check]:
    p = params or Params(1, 0.25)
    if p.n != 1:
        raise ValueError(f"hls suite needs n = 1: {p.n!r}")
    sigma = p.sigma
    at_zero = verify.estimate_hls_constant(sigma, 0.0)
    checks = [
        _below("hls.consistency", abs(verify.estimate_hls_constant(sigma, 1.0) / at_zero - 1.0), 1e-7),
        _below("hls.closed_form", abs(at_zero / verify.hls_constant(sigma) - 1.0), 1e-9),
        _below("hls.bubble_mass", abs(verify.bubble_mass(sigma) - math.pi), 1e-9),
    ]
    gaps = [verify.hls_gap(sigma, _HLS_PERIOD, lam) for lam in _HLS_LAMBDAS]
    for lam, gap in zip(_HLS_LAMBDAS, gaps):
        checks.append(_above(f"hls.gap[lambda={lam:g}]", gap, 0.0))
    expected = (_HLS_LAMBDAS[0] / _HLS_LAMBDAS[1]) ** (1.0 - 2.0 * sigma)
    checks.append(_below("hls.gap_scaling", abs(math.log(gaps[0] / gaps[1]) / math.log(expected) - 1.0), 0.25))
    return checks


def greens_suite(params: Params | None = None, seed: int = 0, **_: object) -> list[Check]:
    n = params.n if params and params.n >= 3 else 3
    x = _axis_point(n, 0.3) - 0.2 * np.eye(n)[min(1, n - 1)]

    def quadratic(points: np.ndarray) -> np.ndarray:
        return points[:, 0] ** 2 + 2.0 * points[:, 1] * points[:, -1] + 1.0

    def minus_laplacian(points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], -2.0)

    checks = [
        _below("greens.representation", greens.representation_error(n, quadratic, minus_laplacian, x), 1e-4),
        _below("greens.poisson_mass", abs(greens.poisson_mass(n, _axis_point(n, 0.3)) - 1.0), 1e-6),
        _below("greens.c31", abs(greens.c_nm(3, 1) * 4.0 * math.pi - 1.0), 1e-15),
    ]
    green = greens.BallGreen(5, 2)
    a, b = _axis_point(5, 0.01), _axis_point(5, -0.01)
    estimate = greens.Gm_montecarlo(green, a, b, seed)
    gap = float(np.linalg.norm(a - b))
    expected = greens.c_nm(5, 2) / gap + _G52_CENTER_REGULAR
    checks.append(_below("greens.near_diagonal_sigmas", abs(estimate.value - expected) / estimate.stderr, 3.0))
    return checks


SUITES: dict[str, Callable[..., list[Check]]] = {
    "kernel": kernel_suite,
    "pohozaev": pohozaev_suite,
    "bubble": bubble_suite,
    "extension": extension_suite,
    "hls": hls_suite,
    "greens": greens_suite,
}


def run_suite(
    name: str,
    params: Params | None = None,
    *,
    solution: str | Path | None = None,
    seed: int = 0,
) -> list[Check]:
    if name == "all":
        checks: list[Check] = []
        for suite_name in SUITES:
            checks.extend(run_suite(suite_name, solution=solution, seed=seed))
        return checks
    if name not in SUITES:
        raise ValueError(f"unsupported suite: {name!r}")
    logger.info("running suite %s", name)
    return SUITES[name](params, solution=solution, seed=seed)
