from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError
from .kernel import KernelTable, Params
from .solver import FowlerSolution, PeriodicProfile, _check_grid, el_residual

_SAMPLES_PER_PERIOD = 64
_BOUND_SLACK = 1e-12


class RadialProfile(Protocol):
    """Anything that exposes a radial function and its first derivative."""

    def u(self, r: np.ndarray | float) -> np.ndarray: ...

    def du(self, r: np.ndarray | float) -> np.ndarray: ...


def _periodic_spline(profile: PeriodicProfile) -> CubicSpline:
    nodes = profile.step * np.arange(profile.grid_size + 1)
    values = np.append(profile.values, profile.values[0])
    return CubicSpline(nodes, values, bc_type="periodic")


@dataclass(frozen=True, eq=False)
class RadialField:
    """Radial singular solution ``u(r) = r^{-a} psi(ln r)`` on a log grid.

    ``a = (n - 2 sigma)/2``. Log radii run from 0 (``r = 1``) downward.
    """

    params: Params
    log_radii: np.ndarray = field(repr=False)
    u_values: np.ndarray = field(repr=False)
    source_profile: PeriodicProfile = field(repr=False)
    power: float

    @cached_property
    def _spline(self) -> CubicSpline:
        return _periodic_spline(self.source_profile)

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.log_radii)

    @property
    def period(self) -> float:
        return self.source_profile.period

    def psi(self, t: np.ndarray | float, derivative: int = 0) -> np.ndarray:
        return self._spline(np.asarray(t, dtype=float), derivative)

    def u(self, r: np.ndarray | float) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return r ** (-self.params.alpha) * self.psi(np.log(r))

    def du(self, r: np.ndarray | float) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        t = np.log(r)
        alpha = self.params.alpha
        return r ** (-alpha - 1.0) * (self.psi(t, 1) - alpha * self.psi(t))

    def d2u(self, r: np.ndarray | float) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        t = np.log(r)
        alpha = self.params.alpha
        psi, dpsi, d2psi = self.psi(t), self.psi(t, 1), self.psi(t, 2)
        return r ** (-alpha - 2.0) * (d2psi - (2.0 * alpha + 1.0) * dpsi + alpha * (alpha + 1.0) * psi)

    @cached_property
    def extrema(self) -> tuple[float, float]:
        """Minimum and maximum of the interpolated ``psi`` over one period."""
        spline = self._spline
        candidates = [np.asarray(self.source_profile.values)]
        roots = spline.derivative().roots(extrapolate=False)
        roots = roots[np.isfinite(roots)]
        if roots.size:
            candidates.append(spline(roots))
        values = np.concatenate(candidates)
        return float(np.min(values)), float(np.max(values))


def reconstruct(
    params: Params,
    sol: FowlerSolution,
    r_min: float,
    samples: int | None = None,
) -> RadialField:
    """Sample ``u(r) = r^{-(n - 2 sigma)/2} psi(ln r)`` for ``r`` from 1 down to ``r_min``.

    ``samples`` defaults to 64 per period of ``ln r``.
    """
    if not (0.0 < r_min < 1.0):
        raise ValueError(f"r_min must lie in (0, 1): {r_min!r}")
    span = -math.log(r_min)
    if samples is None:
        samples = int(math.ceil(_SAMPLES_PER_PERIOD * span / sol.period)) + 1
    if samples < 2:
        raise ValueError(f"samples must be at least 2: {samples!r}")
    log_radii = np.linspace(0.0, -span, int(samples))
    spline = _periodic_spline(sol.profile)
    u_values = np.exp(-params.alpha * log_radii) * spline(log_radii)
    if not np.all(np.isfinite(u_values)) or np.any(u_values <= 0.0):
        raise DomainError("reconstructed field is not finite and positive")
    log_radii.flags.writeable = False
    u_values.flags.writeable = False
    return RadialField(params, log_radii, u_values, sol.profile, sol.power)


@dataclass(frozen=True)
class RateBounds:
    c_lower: float
    c_upper: float


def rate_bounds(field: RadialField) -> RateBounds:
    """Sharp constants of ``r^{-a}/C_lower <= u(r) <= C_upper r^{-a}``."""
    if field.u_values.size == 0:
        raise DomainError("degenerate field: no samples")
    low, high = field.extrema
    if not (low > 0.0 and math.isfinite(high)):
        raise DomainError(f"degenerate field: psi range [{low!r}, {high!r}]")
    bounds = RateBounds(c_lower=1.0 / low, c_upper=high)
    scaled = field.u_values * field.radii**field.params.alpha
    if np.any(scaled > high * (1.0 + _BOUND_SLACK)) or np.any(scaled < low * (1.0 - _BOUND_SLACK)):
        raise DomainError("interpolated field escapes its own rate bounds")
    return bounds


def radial_residual(params: Params, field: RadialField, table: KernelTable) -> float:
    """Residual of ``psi = K_T * psi^p`` for the field's profile.

    The field is read back at the log radii ``-k T/N`` (one full period),
    where the periodic spline reproduces the profile nodes.
    """
    if table.params != params:
        raise ValueError(f"table parameters {table.params!r} do not match {params!r}")
    _check_grid(table, field.source_profile)
    nodes = -table.step * np.arange(table.grid_size)
    psi_back = np.exp(params.alpha * nodes) * field.u(np.exp(nodes))
    # node -k h carries psi((N - k) h)
    psi = np.roll(psi_back[::-1], 1)
    return el_residual(table, psi, field.power)
