from __future__ import annotations

import math

import pytest

from ezfowler.errors import DomainError
from ezfowler.kernel import Params
from ezfowler.verify import (
    bubble_mass,
    estimate_hls_constant,
    hls_constant,
    hls_gap,
    hls_grid_size,
    positive_mass_delta,
)


@pytest.mark.parametrize("sigma", [0.1, 0.25, 0.4])
def test_closed_form_matches_extremal(sigma: float) -> None:
    closed = hls_constant(sigma)
    assert estimate_hls_constant(sigma, 0.0) == pytest.approx(closed, rel=1e-9)
    assert estimate_hls_constant(sigma, 1.0) == pytest.approx(closed, rel=1e-7)


def test_closed_form_at_quarter() -> None:
    expected = math.gamma(0.25) / math.gamma(0.75)
    assert hls_constant(0.25) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("lam", [1.0, 0.5])
def test_bubble_mass_is_pi(lam: float) -> None:
    assert bubble_mass(0.25, lam) == pytest.approx(math.pi, rel=1e-10)


@pytest.mark.parametrize("sigma", [0.0, 0.5, 0.7])
def test_hls_needs_sigma_below_half(sigma: float) -> None:
    with pytest.raises(DomainError):
        hls_constant(sigma)


def test_grid_size_resolves_bubble() -> None:
    assert hls_grid_size(10.0, 1.0) == 1024
    assert hls_grid_size(10.0, 1e-2) == 16384
    assert hls_grid_size(10.0, 1e-3) == 262144


@pytest.mark.parametrize("lam", [1e-2, 1e-3])
def test_periodic_bubble_beats_sharp_constant(lam: float) -> None:
    assert hls_gap(0.25, 10.0, lam) > 0.0


def test_gap_scales_with_bubble_width() -> None:
    wide = hls_gap(0.25, 10.0, 1e-2)
    narrow = hls_gap(0.25, 10.0, 1e-3)
    # gap ~ lambda^{1 - 2 sigma}
    expected = math.log(10.0**0.5)
    assert abs(math.log(wide / narrow) / expected - 1.0) < 0.25


def test_positive_mass_delta() -> None:
    delta = positive_mass_delta(Params(1, 0.25))
    assert 0.0 < delta <= 0.5
    with pytest.raises(DomainError):
        positive_mass_delta(Params(3, 1.0))
