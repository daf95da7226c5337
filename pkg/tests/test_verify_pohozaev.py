from __future__ import annotations

import math

import numpy as np
import pytest

from ezfowler.errors import AccuracyError, DomainError
from ezfowler.kernel import Params
from ezfowler.radial import reconstruct
from ezfowler.verify import BubbleField, fit_c_coef, log_period_radii, pohozaev_sigma1
from tests._fowler_helpers import ODE_PARAMS, ode_constant_solution, ode_fowler_solution


@pytest.mark.parametrize("n", [3, 4, 6])
def test_bubble_has_zero_pohozaev_value(n: int) -> None:
    params = Params(n, 1.0)
    bubble = BubbleField(params)
    report = pohozaev_sigma1(params, bubble, bubble.c_coef, [0.1, 1.0, 7.0, 1e3])
    assert np.max(np.abs(report.values)) < 1e-9


def test_bubble_at_unit_radius_by_hand() -> None:
    bubble = BubbleField(ODE_PARAMS)
    assert bubble.c_coef == 3.0
    assert float(bubble.u(1.0)) == pytest.approx(2.0**-0.5, rel=1e-15)
    assert float(bubble.du(1.0)) == pytest.approx(-(2.0**-1.5), rel=1e-15)


def test_constant_solution_fits_coefficient_and_is_constant() -> None:
    field = reconstruct(ODE_PARAMS, ode_constant_solution(), 1e-2)
    fit = fit_c_coef(ODE_PARAMS, field)
    assert fit.c_coef == pytest.approx(4.0 * math.pi, rel=1e-9)
    report = pohozaev_sigma1(ODE_PARAMS, field, fit.c_coef, np.geomspace(0.01, 0.9, 50))
    assert report.spread < 1e-9
    assert report.mean < 0.0


def test_fowler_solution_is_constant_over_a_period() -> None:
    field = reconstruct(ODE_PARAMS, ode_fowler_solution(), 0.5)
    fit = fit_c_coef(ODE_PARAMS, field)
    assert fit.c_coef == pytest.approx(4.0 * math.pi, rel=1e-3)
    report = pohozaev_sigma1(ODE_PARAMS, field, fit.c_coef, log_period_radii(field))
    assert report.spread < 1e-5
    assert report.radii[0] == pytest.approx(math.exp(-10.0), rel=1e-12)
    assert report.radii[-1] == 1.0


def test_mismatched_coefficient_breaks_constancy() -> None:
    field = reconstruct(ODE_PARAMS, ode_fowler_solution(), 0.5)
    report = pohozaev_sigma1(ODE_PARAMS, field, 2.0 * math.pi, log_period_radii(field))
    assert report.spread > 1e-3


def test_fit_rejects_profile_that_solves_nothing() -> None:
    solution = ode_fowler_solution()
    values = solution.profile.values.copy()
    values[::7] *= 1.01
    distorted = type(solution.profile)(solution.period, values)
    sol = type(solution)(distorted, 0.0, 0.0, 0, "nonconstant", 1.0, solution.power)
    with pytest.raises(AccuracyError, match="mismatch"):
        fit_c_coef(ODE_PARAMS, reconstruct(ODE_PARAMS, sol, 0.5))


@pytest.mark.parametrize(("n", "sigma"), [(3, 0.5), (2, 0.5), (5, 2.0)])
def test_pohozaev_needs_second_order(n: int, sigma: float) -> None:
    params = Params(n, sigma)
    with pytest.raises(DomainError):
        pohozaev_sigma1(params, BubbleField(params), 1.0, [1.0])


def test_pohozaev_rejects_bad_radii() -> None:
    bubble = BubbleField(ODE_PARAMS)
    with pytest.raises(ValueError, match="increasing"):
        pohozaev_sigma1(ODE_PARAMS, bubble, 3.0, [1.0, 0.5])
    field = reconstruct(ODE_PARAMS, ode_constant_solution(), 0.5)
    with pytest.raises(ValueError, match="unit ball"):
        pohozaev_sigma1(ODE_PARAMS, field, 4.0 * math.pi, [0.5, 2.0])
