from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy import optimize, special

from ._quadrature import adaptive_quad, gauss_jacobi, sphere_area
from .errors import AccuracyError, DomainError

logger = logging.getLogger(__name__)

KERNEL_RELATIVE_TOL = 1e-10
TABLE_TOL = 1e-9
MAX_IMAGES = 5000
_NEAR_FIELD_SWITCH = 0.25
_JACOBI_NODES = 160
_CHUNK = 1 << 16
_BETA_CHECK_TOL = 1e-8

NearZeroLaw = Literal["power", "log", "bounded"]


@dataclass(frozen=True)
class Params:
    """Problem parameters ``(n, sigma)`` with ``0 < sigma < n/2``.

    Derived exponents are properties so they can never disagree with the
    stored pair.
    """

    n: int
    sigma: float

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension must be a positive integer: {self.n!r}")
        if not (0.0 < float(self.sigma) < self.n / 2.0):
            raise DomainError(f"sigma must lie in (0, n/2): {self.sigma!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def alpha(self) -> float:
        """Decay rate ``(n - 2 sigma)/2`` of K and of the Emden-Fowler weight."""
        return (self.n - 2.0 * self.sigma) / 2.0

    @property
    def p_crit(self) -> float:
        return (self.n + 2.0 * self.sigma) / (self.n - 2.0 * self.sigma)

    @property
    def q_norm(self) -> float:
        return 2.0 * self.n / (self.n + 2.0 * self.sigma)


@dataclass(frozen=True)
class KernelAsymptotics:
    near_zero_law: NearZeroLaw
    near_zero_exponent: float | None
    decay_rate: float


def _k_line(sigma: float, t: np.ndarray) -> np.ndarray:
    # |2 sinh(t/2)|^{2s-1} + (2 cosh(t/2))^{2s-1}, factored by e^{-alpha t} to stay finite
    alpha = (1.0 - 2.0 * sigma) / 2.0
    decay = np.exp(-alpha * t)
    small = -np.expm1(-t)
    large = 1.0 + np.exp(-t)
    return decay * (small ** (-2.0 * alpha) + large ** (-2.0 * alpha))


def _k_far(params: Params, t: np.ndarray) -> np.ndarray:
    # 2^{-a} w (cosh t - z)^{-a} = w e^{-a t} (1 - 2 z e^{-t} + e^{-2t})^{-a}
    exponent = (params.n - 3) / 2.0
    nodes, weights = gauss_jacobi(_JACOBI_NODES, exponent, exponent)
    omega = sphere_area(params.n - 2)
    out = np.empty_like(t)
    for start in range(0, t.size, _CHUNK // 4):
        chunk = t[start : start + _CHUNK // 4]
        e = np.exp(-chunk)[:, None]
        base = 1.0 - 2.0 * nodes[None, :] * e + e * e
        out[start : start + chunk.size] = omega * np.exp(-params.alpha * chunk) * (
            base ** (-params.alpha) @ weights
        )
    return out


def _k_near(params: Params, t: float, rel_tol: float) -> float:
    # z = 1 - u^2 moves the endpoint blow-up at z -> 1 into u -> 0
    n = params.n
    alpha = params.alpha
    exponent = (n - 3) / 2.0
    a = 2.0 * math.sinh(t / 2.0) ** 2
    root = math.sqrt(a)

    def inner(u: float) -> float:
        return 2.0 * u ** (n - 2) * (2.0 - u * u) ** exponent * (a + u * u) ** (-alpha)

    def outer(u: float) -> float:
        return 2.0 * u ** (n - 2) * (math.sqrt(2.0) + u) ** exponent * (a + u * u) ** (-alpha)

    breaks = [root * f for f in (1.0, 4.0, 16.0, 64.0, 256.0) if root * f < 1.0]
    head = adaptive_quad(inner, 0.0, 1.0, rel_tol=rel_tol / 10.0, accept_tol=rel_tol, points=breaks)
    tail = adaptive_quad(
        outer,
        1.0,
        math.sqrt(2.0),
        rel_tol=rel_tol / 10.0,
        accept_tol=rel_tol,
        weight="alg",
        wvar=(0.0, exponent),
    )
    return 2.0 ** (-alpha) * sphere_area(n - 2) * (head + tail)


def eval_K_many(params: Params, t: np.ndarray | Sequence[float], rel_tol: float = KERNEL_RELATIVE_TOL) -> np.ndarray:
    """Vectorized :func:`eval_K`; every entry must be non-zero."""
    arr = np.abs(np.asarray(t, dtype=float))
    if np.any(arr == 0.0):
        raise DomainError("K is not evaluated at t = 0")
    if params.n == 1:
        return _k_line(params.sigma, arr)
    out = np.empty_like(arr)
    far = arr >= _NEAR_FIELD_SWITCH
    flat = arr.ravel()
    far_flat = far.ravel()
    result = out.ravel()
    if np.any(far_flat):
        result[far_flat] = _k_far(params, flat[far_flat])
    for index in np.flatnonzero(~far_flat):
        result[index] = _k_near(params, float(flat[index]), rel_tol)
    return result.reshape(arr.shape)


def eval_K(params: Params, t: float, rel_tol: float = KERNEL_RELATIVE_TOL) -> float:
    """Evaluate the Emden-Fowler kernel K(t) for ``t != 0``.

    For ``n = 1`` the closed form ``|2 sinh(t/2)|^{2s-1} + (2 cosh(t/2))^{2s-1}``
    is used. For ``n >= 2`` K is the weighted integral

    ``2^{-a} w_{n-2} * int_{-1}^{1} (1 - z^2)^{(n-3)/2} (cosh t - z)^{-a} dz``

    with ``a = (n - 2 sigma)/2``, evaluated by a fixed Gauss-Jacobi rule away
    from the origin and by adaptive quadrature near it.

    Raises:
        DomainError: If ``t == 0``.
        AccuracyError: If the adaptive rule misses ``rel_tol``.
    """
    t = float(t)
    if t == 0.0:
        raise DomainError("K is not evaluated at t = 0")
    return float(eval_K_many(params, np.array([abs(t)]), rel_tol)[0])


def K_asymptotics(params: Params) -> KernelAsymptotics:
    """Leading behaviour of K near ``t = 0`` and its exponential decay rate."""
    if math.isclose(params.sigma, 0.5, rel_tol=0.0, abs_tol=1e-12):
        return KernelAsymptotics("log", None, params.alpha)
    if params.sigma < 0.5:
        return KernelAsymptotics("power", 2.0 * params.sigma - 1.0, params.alpha)
    return KernelAsymptotics("bounded", None, params.alpha)


@lru_cache(maxsize=128)
def kernel_mass(params: Params) -> float:
    """Closed form of the integral of K over the real line."""
    n, sigma = params.n, params.sigma
    log_value = (
        0.5 * n * math.log(math.pi)
        + math.lgamma(sigma)
        + 2.0 * math.lgamma((n - 2.0 * sigma) / 4.0)
        - math.lgamma((n - 2.0 * sigma) / 2.0)
        - 2.0 * math.lgamma((n + 2.0 * sigma) / 4.0)
    )
    return math.exp(log_value)


def kernel_mass_by_quadrature(params: Params) -> float:
    """Integral of K over the line by adaptive quadrature of :func:`eval_K`."""

    def integrand(t: float) -> float:
        return eval_K(params, t) if t > 0.0 else 0.0

    head = adaptive_quad(integrand, 0.0, 1.0, rel_tol=1e-11, accept_tol=1e-8)
    tail = adaptive_quad(integrand, 1.0, math.inf, rel_tol=1e-11, accept_tol=1e-8)
    return 2.0 * (head + tail)


def kernel_second_moment(params: Params) -> float:
    """Closed form of the integral of ``t^2 K(t)`` over the real line.

    It is ``-K^''(0)``; with ``a = (n - 2 sigma)/4`` and ``b = (n + 2 sigma)/4``
    this is ``mass * (trigamma(a) - trigamma(b)) / 2``.
    """
    n, sigma = params.n, params.sigma
    a = (n - 2.0 * sigma) / 4.0
    b = (n + 2.0 * sigma) / 4.0
    return kernel_mass(params) * float(special.polygamma(1, a) - special.polygamma(1, b)) / 2.0


def kernel_symbol(params: Params, omega: float | np.ndarray) -> np.ndarray | float:
    """Fourier transform of K at frequency ``omega``."""
    n, sigma = params.n, params.sigma
    w = np.asarray(omega, dtype=float)
    low = special.loggamma((n - 2.0 * sigma) / 4.0 + 0.5j * w).real
    high = special.loggamma((n + 2.0 * sigma) / 4.0 + 0.5j * w).real
    prefactor = (
        0.5 * n * math.log(math.pi) + math.lgamma(sigma) - math.lgamma((n - 2.0 * sigma) / 2.0)
    )
    value = np.exp(prefactor + 2.0 * (low - high))
    return float(value) if np.ndim(value) == 0 else value


def bifurcation_period(params: Params) -> float:
    """Period at which the constant profile stops being a local maximizer.

    It is the root of ``p * K^(2 pi / T) = K^(0)``: beyond it the first
    Fourier mode of the second variation of J_T turns positive.
    """
    target = kernel_symbol(params, 0.0) / params.p_crit

    def gap(log_period: float) -> float:
        return float(kernel_symbol(params, 2.0 * math.pi / math.exp(log_period))) - target

    return math.exp(optimize.brentq(gap, math.log(1e-3), math.log(1e6), xtol=1e-14))


def _tail_bound(params: Params, period: float, images: int) -> float:
    alpha = params.alpha
    start = (images + 0.5) * period
    envelope = sphere_area(params.n - 1) * (-math.expm1(-start)) ** (-2.0 * alpha)
    return 2.0 * envelope * math.exp(-alpha * start) / (-math.expm1(-alpha * period))


def _moment_reach(params: Params, tol: float) -> float:
    # two-sided bound on the integral of t^2 K beyond the reach, using K(t) <= A e^{-alpha t} for t >= 1
    alpha = params.alpha
    scale = 2.0 * sphere_area(params.n - 1) * (-math.expm1(-1.0)) ** (-2.0 * alpha)
    reach = 1.0
    while scale * math.exp(-alpha * reach) * (reach**2 / alpha + 2.0 * reach / alpha**2 + 2.0 / alpha**3) >= tol:
        reach += 1.0
    return reach


def images_for_tolerance(params: Params, period: float, tol: float) -> int:
    images = 1
    while _tail_bound(params, period, images) >= tol:
        images += 1
        if images > MAX_IMAGES:
            raise ValueError(
                f"tolerance {tol!r} needs more than {MAX_IMAGES} images per side for T={period!r}"
            )
    return images


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Periodized kernel K_T sampled at the lags ``j T / N``.

    ``lag_values[0]`` is not K_T(0): it is the mass-matched cell value chosen
    so that ``h * sum(lag_values)`` equals the integral of K exactly.
    :attr:`weights` adds ``moment_correction`` at lags 1 and N-1 and removes
    it twice at lag 0, so the weights also integrate ``t^2 K`` exactly while
    keeping the mass.
    """

    params: Params
    period: float
    grid_size: int
    lag_values: np.ndarray = field(repr=False)
    tail_terms: int
    tolerance: float
    moment_correction: float = 0.0

    @property
    def step(self) -> float:
        return self.period / self.grid_size

    @property
    def weights(self) -> np.ndarray:
        stencil = np.array(self.lag_values, dtype=float)
        stencil[0] -= 2.0 * self.moment_correction
        stencil[1] += self.moment_correction
        stencil[-1] += self.moment_correction
        return self.step * stencil

    @property
    def mass(self) -> float:
        return kernel_mass(self.params)

    @cached_property
    def _spectrum(self) -> np.ndarray:
        return np.fft.rfft(self.weights)

    def convolve(self, values: np.ndarray) -> np.ndarray:
        """Discrete ``int_0^T K_T(t - s) f(s) ds`` at every grid node."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.grid_size,):
            raise ValueError(
                f"grid mismatch: expected {self.grid_size} samples, got {values.shape!r}"
            )
        return np.fft.irfft(self._spectrum * np.fft.rfft(values), n=self.grid_size)


def periodize(params: Params, T: float, N: int, tol: float = TABLE_TOL) -> KernelTable:
    """Build the :class:`KernelTable` for period ``T`` on ``N`` nodes.

    Images are summed until the geometric tail bound drops below ``tol``.
    The lag-0 entry is mass-matched: ``h * w_0 = int K - h * sum_{j != 0} K_T(j h)``,
    which is positive because K decreases in ``|t|``. The second-moment
    correction ``c`` satisfies ``2 c h^3 = int t^2 K - h * sum_{j != 0} (j h)^2 K(j h)``
    over the whole line; it cancels the ``h^{2 + 2 sigma} f''`` term of the
    discrete convolution, leaving an error of order ``h^{4 + 2 sigma}``.
    """
    if not (T > 0.0 and math.isfinite(T)):
        raise ValueError(f"period must be positive: {T!r}")
    if isinstance(N, bool) or int(N) != N or N < 8 or N % 2:
        raise ValueError(f"grid size must be an even integer >= 8: {N!r}")
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive: {tol!r}")
    N = int(N)
    images = images_for_tolerance(params, T, tol)
    h = T / N
    half = N // 2
    count = max(images * N + half, int(math.ceil(_moment_reach(params, tol) / h)))
    samples = eval_K_many(params, h * np.arange(1, count + 1, dtype=float))
    # samples[k - 1] = K(k h)
    lags = np.arange(1, half + 1)
    values = np.zeros(N)
    for m in range(images + 1):
        values[1 : half + 1] += samples[lags + m * N - 1]
    for m in range(1, images + 1):
        values[1 : half + 1] += samples[m * N - lags - 1]
    values[half + 1 :] = values[1:half][::-1]
    mass = kernel_mass(params)
    center = mass / h - values[1:].sum()
    if not center > 0.0:
        raise AccuracyError(f"lag-0 weight is not positive for T={T!r}, N={N!r}: {center!r}")
    values[0] = center
    t = h * np.arange(1, count + 1, dtype=float)
    discrete = 2.0 * h * float(np.dot(t * t, samples))
    correction = (kernel_second_moment(params) - discrete) / (2.0 * h**3)
    if not center - 2.0 * correction > 0.0:
        raise AccuracyError(f"corrected lag-0 weight is not positive for T={T!r}, N={N!r}")
    values.flags.writeable = False
    logger.debug(
        "periodized kernel n=%d sigma=%g T=%g N=%d images=%d moment_correction=%.3e",
        params.n,
        params.sigma,
        T,
        N,
        images,
        correction,
    )
    return KernelTable(
        params=params,
        period=float(T),
        grid_size=N,
        lag_values=values,
        tail_terms=images,
        tolerance=tol,
        moment_correction=correction,
    )


def riesz_kernel(params: Params, x: Sequence[float] | float, y: Sequence[float] | float) -> float:
    """``|x - y|^{2 sigma - n}``."""
    distance = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))))
    if distance == 0.0:
        raise DomainError("Riesz kernel is singular at x = y")
    return distance ** (2.0 * params.sigma - params.n)


@lru_cache(maxsize=128)
def poisson_beta(params: Params) -> float:
    """Normalization constant of the Poisson extension kernel.

    The Gamma closed form is checked against a radial quadrature of the
    normalization integral.
    """
    n, sigma = params.n, params.sigma
    closed = math.gamma((n + 2.0 * sigma) / 2.0) / (math.pi ** (n / 2.0) * math.gamma(sigma))
    power = (n + 2.0 * sigma) / 2.0
    head = adaptive_quad(lambda r: r ** (n - 1) * (1.0 + r * r) ** (-power), 0.0, 1.0, rel_tol=1e-13)
    # r = 1/v on the tail keeps the integrand bounded
    tail = adaptive_quad(
        lambda v: (1.0 + v * v) ** (-power),
        0.0,
        1.0,
        rel_tol=1e-13,
        weight="alg",
        wvar=(2.0 * sigma - 1.0, 0.0),
    )
    quadrature = 1.0 / (sphere_area(n - 1) * (head + tail))
    if abs(quadrature - closed) > _BETA_CHECK_TOL * closed:
        raise AccuracyError(
            f"Poisson normalization mismatch for n={n!r} sigma={sigma!r}: {closed!r} vs {quadrature!r}"
        )
    return closed


def poisson_kernel(params: Params, x: Sequence[float] | float, t: float) -> float:
    """``beta t^{2 sigma} / (|x|^2 + t^2)^{(n + 2 sigma)/2}`` for ``t > 0``."""
    if not t > 0.0:
        raise DomainError(f"extension height must be positive: {t!r}")
    radius2 = float(np.sum(np.atleast_1d(np.asarray(x, dtype=float)) ** 2))
    power = (params.n + 2.0 * params.sigma) / 2.0
    return poisson_beta(params) * t ** (2.0 * params.sigma) / (radius2 + t * t) ** power
