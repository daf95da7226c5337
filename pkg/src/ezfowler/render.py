from __future__ import annotations

from typing import Any

import numpy as np

from .radial import RadialField
from .solver import FowlerSolution


def plot_profile(
    solution: FowlerSolution,
    ax: Any | None = None,
    show: bool = True,
    title: str | None = None,
    periods: int = 1,
    line_width: float = 1.0,
) -> Any:
    """Plot the periodic profile ``psi`` over ``periods`` periods."""
    if periods < 1:
        raise ValueError(f"periods must be positive: {periods!r}")
    plt = _require_matplotlib()
    if ax is None:
        _, ax = plt.subplots()
    profile = solution.profile
    t = np.concatenate([profile.nodes + k * profile.period for k in range(periods)])
    values = np.tile(profile.values, periods)
    ax.plot(t, values, linewidth=line_width)
    ax.set_xlabel("t")
    ax.set_ylabel("psi")
    if title is None:
        title = f"T={profile.period:g} ({solution.variant})"
    ax.set_title(title)
    if show:
        plt.show()
    return ax


def plot_field(
    field: RadialField,
    ax: Any | None = None,
    show: bool = True,
    title: str | None = None,
    loglog: bool = True,
    line_width: float = 1.0,
) -> Any:
    """Plot ``u(r)`` of a reconstructed radial field."""
    plt = _require_matplotlib()
    if ax is None:
        _, ax = plt.subplots()
    ax.plot(field.radii, field.u_values, linewidth=line_width)
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("r")
    ax.set_ylabel("u")
    if title is not None:
        ax.set_title(title)
    if show:
        plt.show()
    return ax


def _require_matplotlib():
    try:
        import matplotlib.pyplot as plt
    except Exception as exc:
        raise ImportError(
            "matplotlib is required for plotting. "
            "Install it with `pip install matplotlib`."
        ) from exc
    return plt
