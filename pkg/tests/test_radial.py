from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from ezfowler.errors import DomainError
from ezfowler.kernel import Params
from ezfowler.radial import radial_residual, rate_bounds, reconstruct
from ezfowler.solver import PeriodicProfile
from tests._fowler_helpers import (
    ODE_CONSTANT_PSI,
    ODE_PARAMS,
    ode_constant_solution,
    ode_fowler_solution,
    ode_table,
)


def test_constant_solution_gives_pure_power() -> None:
    field = reconstruct(ODE_PARAMS, ode_constant_solution(), 1e-3)
    assert field.radii[0] == 1.0
    assert field.radii[-1] == pytest.approx(1e-3, rel=1e-12)
    assert np.all(np.diff(field.radii) < 0.0)
    assert field.u_values == pytest.approx(ODE_CONSTANT_PSI * field.radii**-0.5, rel=1e-10)


def test_default_sampling_density() -> None:
    solution = ode_constant_solution()
    field = reconstruct(ODE_PARAMS, solution, 0.5)
    assert field.u_values.size == math.ceil(32.0 * math.log(2.0)) + 1


def test_field_derivatives_of_pure_power() -> None:
    field = reconstruct(ODE_PARAMS, ode_constant_solution(), 1e-2)
    r = np.array([0.05, 0.3, 0.9])
    assert field.du(r) == pytest.approx(-0.5 * ODE_CONSTANT_PSI * r**-1.5, rel=1e-9)
    assert field.d2u(r) == pytest.approx(0.75 * ODE_CONSTANT_PSI * r**-2.5, rel=1e-9)


def test_rate_bounds_of_constant_solution() -> None:
    bounds = rate_bounds(reconstruct(ODE_PARAMS, ode_constant_solution(), 1e-2))
    assert bounds.c_upper == pytest.approx(ODE_CONSTANT_PSI, rel=1e-10)
    assert bounds.c_lower == pytest.approx(1.0 / ODE_CONSTANT_PSI, rel=1e-10)


def test_rate_bounds_hold_for_fowler_solution() -> None:
    solution = ode_fowler_solution()
    field = reconstruct(ODE_PARAMS, solution, 1e-6)
    bounds = rate_bounds(field)
    scaled = field.u_values * field.radii**0.5
    assert bounds.c_upper >= scaled.max()
    assert 1.0 / bounds.c_lower <= scaled.min()
    assert bounds.c_upper == pytest.approx(solution.profile.values.max(), rel=1e-6)
    assert bounds.c_upper * bounds.c_lower > 1.0


def test_radial_residual_matches_solver_residual() -> None:
    solution = ode_fowler_solution()
    table = ode_table(10.0, 1024)
    field = reconstruct(ODE_PARAMS, solution, 1e-3)
    assert radial_residual(ODE_PARAMS, field, table) == pytest.approx(solution.el_residual, abs=1e-12)


def test_radial_residual_checks_parameters() -> None:
    field = reconstruct(ODE_PARAMS, ode_constant_solution(), 0.5)
    with pytest.raises(ValueError, match="grid mismatch"):
        radial_residual(ODE_PARAMS, field, ode_table(10.0, 1024))
    other = reconstruct(Params(3, 0.5), ode_constant_solution(), 0.5)
    with pytest.raises(ValueError, match="do not match"):
        radial_residual(Params(3, 0.5), other, ode_table(2.0, 256))


@pytest.mark.parametrize("r_min", [0.0, 1.0, 2.0, -0.5])
def test_reconstruct_rejects_bad_radius(r_min: float) -> None:
    with pytest.raises(ValueError):
        reconstruct(ODE_PARAMS, ode_constant_solution(), r_min)


def test_reconstruct_rejects_too_few_samples() -> None:
    with pytest.raises(ValueError, match="samples"):
        reconstruct(ODE_PARAMS, ode_constant_solution(), 0.5, samples=1)


def test_rate_bounds_reject_degenerate_field(monkeypatch) -> None:  # noqa: ANN001
    field = reconstruct(ODE_PARAMS, ode_constant_solution(), 0.5)
    monkeypatch.setitem(field.__dict__, "extrema", (0.0, 1.0))
    with pytest.raises(DomainError, match="degenerate"):
        rate_bounds(field)


def test_radial_residual_detects_perturbed_profile() -> None:
    solution = ode_constant_solution()
    grid = np.arange(solution.grid_size) * solution.period / solution.grid_size
    values = solution.profile.values + 0.01 * np.sin(2.0 * math.pi * grid / solution.period)
    perturbed = replace(solution, profile=PeriodicProfile(solution.period, values))
    field = reconstruct(ODE_PARAMS, perturbed, 1e-3)
    assert radial_residual(ODE_PARAMS, field, ode_table(2.0, 256)) > 1e-3
