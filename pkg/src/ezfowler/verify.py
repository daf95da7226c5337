from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._quadrature import adaptive_quad, sphere_area, spherical_mean_riesz
from .errors import AccuracyError, DomainError
from .kernel import Params, eval_K_many, periodize, poisson_kernel
from .radial import RadialField, RadialProfile
from .solver import J_T, PeriodicProfile

logger = logging.getLogger(__name__)

C_FIT_TOL = 1e-6
_QUAD_TOL = 1e-12
_NESTED_ACCEPT = 1e-8


@dataclass(frozen=True, eq=False)
class PohozaevReport:
    radii: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    spread: float

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


@dataclass(frozen=True)
class CoefficientFit:
    c_coef: float
    mismatch: float


@dataclass(frozen=True)
class BubbleCheck:
    deviation: float
    beta_prime: float


@dataclass(frozen=True)
class ExtensionCheck:
    integral: float
    expected: float
    rel_error: float


@dataclass(frozen=True)
class BubbleField:
    """Standard bubble ``(lam / (lam^2 + r^2))^{(n - 2 sigma)/2}``."""

    params: Params
    lam: float = 1.0

    @property
    def c_coef(self) -> float:
        """Coefficient of ``-Delta u = c u^{(n+2)/(n-2)}`` (second order only)."""
        _require_second_order(self.params)
        return float(self.params.n * (self.params.n - 2))

    def u(self, r: np.ndarray | float) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return (self.lam / (self.lam**2 + r * r)) ** self.params.alpha

    def du(self, r: np.ndarray | float) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return -2.0 * self.params.alpha * r / (self.lam**2 + r * r) * self.u(r)


def _require_second_order(params: Params) -> None:
    if not math.isclose(params.sigma, 1.0, rel_tol=0.0, abs_tol=1e-12):
        raise DomainError(f"Pohozaev functional is implemented for sigma = 1 only: {params.sigma!r}")
    if params.n < 3:
        raise DomainError(f"Pohozaev functional needs n >= 3: {params.n!r}")


def pohozaev_sigma1(
    params: Params,
    field: RadialProfile,
    c_coef: float,
    radii: Sequence[float] | np.ndarray,
) -> PohozaevReport:
    """Evaluate the sphere functional P(u, r) of ``-Delta u = c u^{(n+2)/(n-2)}``.

    For radial ``u`` every surface integral reduces to
    ``w_{n-1} r^{n-1}`` times the integrand, which gives

    ``P = w r^{n-1} [(n-2)/2 u u' + r/2 u'^2] + w (n-2)/(2n) c r^n u^{2n/(n-2)}``.
    """
    _require_second_order(params)
    n = params.n
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0.0) or np.any(np.diff(radii) <= 0.0):
        raise ValueError("radii must be positive and strictly increasing")
    if isinstance(field, RadialField) and radii[-1] > 1.0:
        raise ValueError(f"radii leave the unit ball: {radii[-1]!r}")
    u = np.asarray(field.u(radii), dtype=float)
    du = np.asarray(field.du(radii), dtype=float)
    omega = sphere_area(n - 1)
    gradient = radii ** (n - 1) * (0.5 * (n - 2) * u * du + 0.5 * radii * du * du)
    potential = (n - 2) / (2.0 * n) * c_coef * radii**n * u ** (2.0 * n / (n - 2))
    values = omega * (gradient + potential)
    mean = float(np.mean(values))
    spread = float(np.max(np.abs(values - mean))) / (abs(mean) + 1.0)
    return PohozaevReport(radii=radii, values=values, spread=spread)


def log_period_radii(field: RadialField, count: int = 65) -> np.ndarray:
    """Increasing radii covering exactly one period of ``ln r`` below ``r = 1``."""
    return np.exp(np.linspace(-field.period, 0.0, count))


def fit_c_coef(params: Params, field: RadialField, count: int = 512) -> CoefficientFit:
    """Least-squares ``c`` in ``a^2 psi - psi'' = c psi^p`` over one period.

    This is ``-Delta u = c u^p`` written in the log variable with
    ``a = (n - 2)/2``.

    Raises:
        AccuracyError: If the relative misfit exceeds ``1e-6``.
    """
    _require_second_order(params)
    t = np.linspace(0.0, field.period, count, endpoint=False)
    psi = field.psi(t)
    lhs = params.alpha**2 * psi - field.psi(t, 2)
    rhs = psi**params.p_crit
    c_coef = float(np.dot(lhs, rhs) / np.dot(rhs, rhs))
    mismatch = float(np.sum((lhs - c_coef * rhs) ** 2) / np.sum((c_coef * rhs) ** 2))
    if mismatch > C_FIT_TOL:
        raise AccuracyError(f"field does not fit -Delta u = c u^p: mismatch {mismatch!r}")
    return CoefficientFit(c_coef, mismatch)


def _radial_riesz_integral(params: Params, density, s: float) -> float:
    """``int_0^inf density(rho) rho^{n-1} A(s, rho) d rho`` with A the spherical Riesz mean."""
    n, sigma = params.n, params.sigma
    if s == 0.0:
        omega = sphere_area(n - 1)
        head = adaptive_quad(
            lambda rho: omega * density(rho), 0.0, 1.0, rel_tol=_QUAD_TOL, weight="alg", wvar=(2.0 * sigma - 1.0, 0.0)
        )
        tail = adaptive_quad(
            lambda rho: omega * density(rho) * rho ** (2.0 * sigma - 1.0), 1.0, math.inf, rel_tol=_QUAD_TOL
        )
        return head + tail

    def integrand(rho: float) -> float:
        if rho == 0.0:
            return 0.0
        return density(rho) * rho ** (n - 1) * spherical_mean_riesz(n, sigma, s, rho)

    edge = 2.0 * s + 1.0
    head = adaptive_quad(integrand, 0.0, s, rel_tol=_QUAD_TOL, accept_tol=_NESTED_ACCEPT)
    middle = adaptive_quad(integrand, s, edge, rel_tol=_QUAD_TOL, accept_tol=_NESTED_ACCEPT)
    tail = adaptive_quad(integrand, edge, math.inf, rel_tol=_QUAD_TOL, accept_tol=_NESTED_ACCEPT)
    return head + middle + tail


def check_bubble(
    params: Params,
    mu: float,
    y0: Sequence[float] | float,
    sample_points: Sequence[Sequence[float] | float],
) -> BubbleCheck:
    """Check that ``w(y) = ((1 + mu^2|y0|^2)/(1 + mu^2|y - y0|^2))^{(n-2 sigma)/2}``
    is a fixed shape of ``y -> int w(z)^p |y - z|^{2 sigma - n} dz``.

    The integral is reduced around ``y0`` in the scaled variable
    ``v = mu (z - y0)``. Returns the largest relative deviation of
    ``w / integral`` from its value at the first sample, and that value.
    """
    if not mu > 0.0:
        raise DomainError(f"mu must be positive: {mu!r}")
    if not sample_points:
        raise ValueError("sample_points is empty")
    n, sigma, alpha = params.n, params.sigma, params.alpha
    center = np.atleast_1d(np.asarray(y0, dtype=float))
    height = (1.0 + mu * mu * float(np.dot(center, center))) ** alpha
    power = (n + 2.0 * sigma) / 2.0
    prefactor = mu ** (-2.0 * sigma) * height**params.p_crit

    def density(rho: float) -> float:
        return (1.0 + rho * rho) ** (-power)

    ratios = []
    for point in sample_points:
        offset = np.atleast_1d(np.asarray(point, dtype=float)) - center
        s = mu * float(np.linalg.norm(offset))
        w = height * (1.0 + s * s) ** (-alpha)
        integral = prefactor * _radial_riesz_integral(params, density, s)
        ratios.append(w / integral)
    ratios = np.asarray(ratios)
    deviation = float(np.max(np.abs(ratios / ratios[0] - 1.0)))
    logger.debug("bubble check n=%d sigma=%g mu=%g: deviation=%.3e", n, sigma, mu, deviation)
    return BubbleCheck(deviation=deviation, beta_prime=float(ratios[0]))


def check_extension_identity(
    params: Params, x: Sequence[float] | float, t: float
) -> ExtensionCheck:
    """Compare ``int P_sigma(x - y, t) |y|^{2 sigma - n} dy`` with ``|(x, t)|^{2 sigma - n}``."""
    if not t > 0.0:
        raise DomainError(f"extension height must be positive: {t!r}")
    s = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    integral = _radial_riesz_integral(params, lambda rho: poisson_kernel(params, rho, t), s)
    expected = (s * s + t * t) ** (params.sigma - params.n / 2.0)
    return ExtensionCheck(integral, expected, abs(integral - expected) / expected)


def _line_bubble(sigma: float, lam: float, t: np.ndarray | float) -> np.ndarray | float:
    return (lam / (lam * lam + np.asarray(t) ** 2)) ** ((1.0 + 2.0 * sigma) / 2.0)


def _require_hls_sigma(sigma: float) -> None:
    if not 0.0 < sigma < 0.5:
        raise DomainError(f"sigma must lie in (0, 1/2): {sigma!r}")


def hls_constant(sigma: float) -> float:
    """Closed form ``pi^{-2 sigma} Gamma(sigma) sqrt(pi) / Gamma(sigma + 1/2)``."""
    _require_hls_sigma(sigma)
    return math.pi ** (-2.0 * sigma) * math.gamma(sigma) * math.sqrt(math.pi) / math.gamma(sigma + 0.5)


def bubble_mass(sigma: float, lam: float = 1.0) -> float:
    """``int u_lam^{2/(1 + 2 sigma)}`` over the line; equals pi."""
    _require_hls_sigma(sigma)
    exponent = 2.0 / (1.0 + 2.0 * sigma)
    return adaptive_quad(lambda s: _line_bubble(sigma, lam, s) ** exponent, -math.inf, math.inf, rel_tol=1e-13)


def estimate_hls_constant(sigma: float, t: float = 0.0) -> float:
    """Sharp one-dimensional HLS constant from the extremal ``u_1``.

    Uses ``S pi^{2 sigma} u_1(t)^{(1 - 2 sigma)/(1 + 2 sigma)} = int u_1(s) |t - s|^{2 sigma - 1} ds``.
    """
    _require_hls_sigma(sigma)
    exponent = 2.0 * sigma - 1.0

    def bubble(s: float) -> float:
        return float(_line_bubble(sigma, 1.0, s))

    def weighted(s: float) -> float:
        return bubble(s) * abs(t - s) ** exponent

    left = adaptive_quad(bubble, t - 1.0, t, rel_tol=_QUAD_TOL, weight="alg", wvar=(0.0, exponent))
    right = adaptive_quad(bubble, t, t + 1.0, rel_tol=_QUAD_TOL, weight="alg", wvar=(exponent, 0.0))
    far_left = adaptive_quad(weighted, -math.inf, t - 1.0, rel_tol=_QUAD_TOL)
    far_right = adaptive_quad(weighted, t + 1.0, math.inf, rel_tol=_QUAD_TOL)
    integral = left + right + far_left + far_right
    return integral / (math.pi ** (2.0 * sigma) * bubble(t) ** ((1.0 - 2.0 * sigma) / (1.0 + 2.0 * sigma)))


def hls_grid_size(T: float, lam: float) -> int:
    """Power-of-two grid resolving ``u_lam`` with about 16 nodes per ``lam``."""
    return max(1024, 1 << int(math.ceil(math.log2(16.0 * T / lam))))


def hls_gap(sigma: float, T: float, lam: float, N: int | None = None) -> float:
    """``J_T[f_lam] - S(sigma)`` for ``n = 1`` with ``f_lam = u_lam(t - T/2)`` on one period."""
    _require_hls_sigma(sigma)
    params = Params(1, sigma)
    N = N or hls_grid_size(T, lam)
    table = periodize(params, T, N)
    nodes = T * np.arange(N) / N
    profile = PeriodicProfile(T, _line_bubble(sigma, lam, nodes - T / 2.0))
    gap = J_T(table, profile) - hls_constant(sigma)
    logger.info("HLS gap sigma=%g T=%g lam=%g N=%d: %.6e", sigma, T, lam, N, gap)
    return gap


def positive_mass_delta(params: Params, steps: int = 100, grid: int = 400) -> float:
    """Largest ``delta`` in ``(0, 0.5]`` with ``K(t) >= |t|^{2s-1} + 4^{2s-1}`` on ``(0, 4 delta]``."""
    if params.n != 1 or not params.sigma < 0.5:
        raise DomainError(f"positive-mass bound needs n = 1 and sigma < 1/2: {params!r}")
    exponent = 2.0 * params.sigma - 1.0
    for delta in np.linspace(0.5, 0.5 / steps, steps):
        t = np.geomspace(1e-6, 4.0 * delta, grid)
        if np.all(eval_K_many(params, t) >= t**exponent + 4.0**exponent):
            return float(delta)
    raise AccuracyError("no delta in (0, 0.5] satisfies the positive-mass bound")
