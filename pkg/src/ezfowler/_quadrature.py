from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError

_DEFAULT_RELATIVE_TOL = 1e-11


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere S^dim (two points for S^0)."""
    if dim < 0:
        raise ValueError(f"sphere dimension must be non-negative: {dim!r}")
    if dim == 0:
        return 2.0
    k = dim + 1
    return 2.0 * math.pi ** (k / 2.0) / math.gamma(k / 2.0)


def adaptive_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    *,
    rel_tol: float = _DEFAULT_RELATIVE_TOL,
    abs_tol: float = 0.0,
    accept_tol: float | None = None,
    points: list[float] | None = None,
    weight: str | None = None,
    wvar: object = None,
    limit: int = 400,
) -> float:
    """Run ``scipy.integrate.quad`` and check its own error estimate.

    QUADPACK warnings are silenced; the returned error estimate decides.
    """
    kwargs: dict[str, object] = {"epsabs": abs_tol, "epsrel": rel_tol, "limit": limit}
    if points:
        inside = sorted(p for p in points if a < p < b)
        if inside:
            kwargs["points"] = inside
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, error = integrate.quad(func, a, b, **kwargs)
    if accept_tol is None:
        accept_tol = max(100.0 * rel_tol, 1e-9)
    if not math.isfinite(value) or error > accept_tol * abs(value) + abs_tol:
        raise AccuracyError(
            f"adaptive quadrature on [{a!r}, {b!r}] missed tolerance: "
            f"value={value!r} error={error!r}"
        )
    return float(value)


@lru_cache(maxsize=64)
def gauss_jacobi(count: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_jacobi(count, alpha, beta)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@lru_cache(maxsize=64)
def gauss_legendre(count: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(count)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def sphere_rule(n: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^{n-1} embedded in R^n, exact up to ``degree``.

    Built recursively: Gauss-Jacobi in the first coordinate with weight
    (1 - z^2)^{(n-3)/2}, times a rule on S^{n-2}; the circle uses the
    trapezoid rule. Weights sum to the sphere area.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive: {n!r}")
    if degree < 1:
        raise ValueError(f"degree must be positive: {degree!r}")
    if n == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    if n == 2:
        count = degree + 1
        phi = 2.0 * math.pi * np.arange(count) / count
        points = np.column_stack([np.cos(phi), np.sin(phi)])
        return points, np.full(count, 2.0 * math.pi / count)
    count = degree // 2 + 1
    exponent = (n - 3) / 2.0
    z, wz = gauss_jacobi(count, exponent, exponent)
    sub_points, sub_weights = sphere_rule(n - 1, degree)
    scale = np.sqrt(1.0 - z * z)
    points = np.concatenate(
        [np.column_stack([np.full(len(sub_weights), zi), si * sub_points]) for zi, si in zip(z, scale)]
    )
    weights = np.concatenate([wi * sub_weights for wi in wz])
    return points, weights


def spherical_mean_riesz(n: int, sigma: float, s: float, rho: float) -> float:
    """Integral of |s e_1 - rho zeta|^{2 sigma - n} over zeta in S^{n-1}.

    Plain adaptive quadrature over the polar angle; it does not use the
    kernel module so that it can serve as an independent oracle.
    """
    exponent = 2.0 * sigma - n
    if s == 0.0 or rho == 0.0:
        radius = rho if s == 0.0 else s
        return sphere_area(n - 1) * radius**exponent
    if n == 1:
        return abs(s - rho) ** exponent + (s + rho) ** exponent
    gap = (s - rho) ** 2
    cross = 4.0 * s * rho
    half = exponent / 2.0

    def integrand(theta: float) -> float:
        return (gap + cross * math.sin(theta / 2.0) ** 2) ** half * math.sin(theta) ** (n - 2)

    breaks = []
    if gap > 0.0:
        scale = 2.0 * math.sqrt(gap / cross)
        breaks = [scale * f for f in (0.5, 1.0, 4.0, 16.0) if scale * f < math.pi]
    value = adaptive_quad(integrand, 0.0, math.pi, rel_tol=1e-12, points=breaks)
    return sphere_area(n - 2) * value
