from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._quadrature import gauss_legendre, sphere_area, sphere_rule
from .errors import AccuracyError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_MC_SAMPLES = 200_000
DEFAULT_STREAMS = 4
_BOUNDARY_TOL = 1e-9
_WIDE_RADIUS = 2.0

PointFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BallGreen:
    """Iterated Green function ``G_m`` of ``(-Delta)^m`` on the unit ball."""

    n: int
    m: int
    mc_samples: int = DEFAULT_MC_SAMPLES
    streams: int = DEFAULT_STREAMS

    def __post_init__(self) -> None:
        _check_order(self.n, self.m)
        if self.mc_samples < 2 or self.streams < 1:
            raise ValueError(f"invalid sampling budget: {self.mc_samples!r} x {self.streams!r}")


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    samples: int


def _check_order(n: int, m: int) -> None:
    if n < 3:
        raise DomainError(f"ball Green functions need n >= 3: {n!r}")
    if m < 1 or 2 * m >= n:
        raise DomainError(f"order must satisfy 1 <= m and 2m < n: n={n!r} m={m!r}")


def _point(n: int, x: Sequence[float]) -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape != (n,):
        raise DomainError(f"expected a point in R^{n}: {x!r}")
    return arr


def _interior(n: int, x: Sequence[float]) -> np.ndarray:
    arr = _point(n, x)
    if not float(np.dot(arr, arr)) < 1.0:
        raise DomainError(f"point is not inside the unit ball: {x!r}")
    return arr


def _green_rows(n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # |x/|x| - |x| y| written without dividing by |x|
    distance = np.linalg.norm(a - b, axis=-1)
    image = np.sqrt(
        np.maximum(
            1.0 - 2.0 * np.sum(a * b, axis=-1) + np.sum(a * a, axis=-1) * np.sum(b * b, axis=-1),
            0.0,
        )
    )
    with np.errstate(divide="ignore"):
        value = distance ** (2.0 - n) - image ** (2.0 - n)
    return value / ((n - 2) * sphere_area(n - 1))


def G1(n: int, x: Sequence[float], y: Sequence[float]) -> float:
    """Green function of ``-Delta`` on the unit ball with zero boundary values."""
    _check_order(n, 1)
    a, b = _interior(n, x), _interior(n, y)
    if np.array_equal(a, b):
        raise DomainError("G1 is singular at x = y")
    return float(_green_rows(n, a, b))


def H1(n: int, x: Sequence[float], y: Sequence[float]) -> float:
    """Poisson kernel ``(1 - |x|^2) / (w_{n-1} |x - y|^n)`` of the unit ball."""
    _check_order(n, 1)
    a = _interior(n, x)
    b = _point(n, y)
    if not math.isclose(float(np.linalg.norm(b)), 1.0, rel_tol=0.0, abs_tol=_BOUNDARY_TOL):
        raise DomainError(f"boundary point must lie on the unit sphere: {y!r}")
    return float(_poisson_rows(n, a, b[None, :])[0])


def _poisson_rows(n: int, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return (1.0 - float(np.dot(x, x))) / (sphere_area(n - 1) * np.linalg.norm(ys - x, axis=-1) ** n)


def c_nm(n: int, m: int) -> float:
    """``Gamma((n - 2m)/2) / (2^{2m} pi^{n/2} Gamma(m))``."""
    if m < 1 or 2 * m >= n:
        raise DomainError(f"order must satisfy 1 <= m and 2m < n: n={n!r} m={m!r}")
    return math.gamma((n - 2 * m) / 2.0) / (2.0 ** (2 * m) * math.pi ** (n / 2.0) * math.gamma(m))


def poisson_mass(n: int, x: Sequence[float], degree: int = 16) -> float:
    """Sphere-rule integral of ``H1(x, .)`` over the unit sphere."""
    a = _interior(n, x)
    points, weights = sphere_rule(n, degree)
    return float(np.dot(weights, _poisson_rows(n, a, points)))


def representation_error(
    n: int,
    u: PointFunction,
    minus_laplacian: PointFunction,
    x: Sequence[float],
    *,
    degree: int = 16,
    radial_nodes: int = 24,
) -> float:
    """``|u(x) - int G1 (-Delta u) - int H1 u|`` by ball and sphere quadrature.

    The ball integral uses polar coordinates centred at ``x`` so that the
    ``|x - y|^{2-n}`` singularity is absorbed by the volume element.
    """
    _check_order(n, 1)
    a = _interior(n, x)
    directions, direction_weights = sphere_rule(n, degree)
    reach = directions @ a
    rho_max = -reach + np.sqrt(reach * reach + 1.0 - float(np.dot(a, a)))
    nodes, node_weights = gauss_legendre(radial_nodes)
    # rho = rho_max (1 + s)/2 per direction
    rho = 0.5 * rho_max[:, None] * (1.0 + nodes[None, :])
    weights = 0.5 * rho_max[:, None] * node_weights[None, :] * rho ** (n - 1) * direction_weights[:, None]
    points = a + rho[..., None] * directions[:, None, :]
    flat = points.reshape(-1, n)
    green = _green_rows(n, np.broadcast_to(a, flat.shape), flat)
    volume = float(np.sum(weights.reshape(-1) * green * minus_laplacian(flat)))
    boundary = float(np.dot(direction_weights, _poisson_rows(n, a, directions) * u(directions)))
    return abs(float(u(a[None, :])[0]) - volume - boundary)


def _uniform_directions(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    gaussian = rng.standard_normal((count, n))
    return gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)


class _Mixture:
    """Proposal on R^n: uniform ball plus ``|z - c|^{2-n}`` laws around chosen centres."""

    def __init__(self, n: int, local_radius: float) -> None:
        self.n = n
        self.radii = (_WIDE_RADIUS, local_radius)
        self.ball_volume = sphere_area(n - 1) / n

    def sample(self, rng: np.random.Generator, previous: np.ndarray, target: np.ndarray) -> np.ndarray:
        count, n = previous.shape
        choice = rng.integers(0, 5, size=count)
        out = np.empty_like(previous)
        uniform = choice == 0
        k = int(np.sum(uniform))
        out[uniform] = _uniform_directions(rng, k, n) * rng.random(k)[:, None] ** (1.0 / n)
        for index, (radius, centers) in enumerate(
            (
                (self.radii[0], previous),
                (self.radii[0], target),
                (self.radii[1], previous),
                (self.radii[1], target),
            ),
            start=1,
        ):
            mask = choice == index
            k = int(np.sum(mask))
            rho = radius * np.sqrt(rng.random(k))
            out[mask] = centers[mask] + rho[:, None] * _uniform_directions(rng, k, n)
        return out

    def density(self, z: np.ndarray, previous: np.ndarray, target: np.ndarray) -> np.ndarray:
        n = self.n
        inside = np.sum(z * z, axis=1) < 1.0
        total = inside / self.ball_volume
        for radius, centers in (
            (self.radii[0], previous),
            (self.radii[0], target),
            (self.radii[1], previous),
            (self.radii[1], target),
        ):
            distance = np.linalg.norm(z - centers, axis=1)
            with np.errstate(divide="ignore"):
                law = distance ** (2.0 - n) / (0.5 * sphere_area(n - 1) * radius * radius)
            total = total + np.where(distance < radius, law, 0.0)
        return total / 5.0


def _chain_weights(
    green: BallGreen, x: np.ndarray, y: np.ndarray, rng: np.random.Generator, count: int, mixture: _Mixture
) -> np.ndarray:
    n = green.n
    previous = np.broadcast_to(x, (count, n)).copy()
    target = np.broadcast_to(y, (count, n))
    weight = np.ones(count)
    alive = np.ones(count, dtype=bool)
    for _ in range(green.m - 1):
        z = mixture.sample(rng, previous, target)
        q = mixture.density(z, previous, target)
        alive &= np.sum(z * z, axis=1) < 1.0
        weight[alive] *= _green_rows(n, previous[alive], z[alive]) / q[alive]
        previous = z
    weight[~alive] = 0.0
    weight[alive] *= _green_rows(n, previous[alive], target[alive])
    return weight


def Gm_montecarlo(
    green: BallGreen,
    x: Sequence[float],
    y: Sequence[float],
    seed: int,
    *,
    target_stderr: float | None = None,
) -> MonteCarloEstimate:
    """Importance-sampled estimate of the iterated kernel ``G_m(x, y)``.

    Intermediate points are drawn from a mixture of the uniform law on the
    ball and ``|z - c|^{2-n}`` laws around the previous chain point and
    ``y``, at a wide and a local radius. Streams are independent Philox
    generators spawned from ``seed`` and reduced in a fixed order.

    Raises:
        AccuracyError: If ``target_stderr`` is given and not reached.
    """
    if green.m < 2:
        raise DomainError(f"Monte Carlo is used for m >= 2 only: {green.m!r}")
    n = green.n
    a, b = _interior(n, x), _interior(n, y)
    gap = float(np.linalg.norm(a - b))
    if gap == 0.0:
        raise DomainError("G_m is singular at x = y")
    mixture = _Mixture(n, min(_WIDE_RADIUS, 2.0 * gap))
    per_stream = -(-green.mc_samples // green.streams)
    children = np.random.SeedSequence(seed).spawn(green.streams)
    chunks = []
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        chunks.append(_chain_weights(green, a, b, rng, per_stream, mixture))
        logger.debug("Gm stream: %d samples", per_stream)
    weights = np.concatenate(chunks)
    value = float(np.mean(weights))
    stderr = float(np.std(weights, ddof=1) / math.sqrt(weights.size))
    if target_stderr is not None and stderr > target_stderr:
        raise AccuracyError(f"standard error {stderr!r} above requested {target_stderr!r}")
    return MonteCarloEstimate(value=value, stderr=stderr, samples=int(weights.size))
