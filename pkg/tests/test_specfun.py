from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from solenoid_modes.errors import DomainError, PoleError
from solenoid_modes.specfun import bessel_k, gamma, sigma

# frozen from mpmath at 30 digits
K_FROZEN = [
    (0.3, 1.0, 0.43507602420880202),
    (0.7, 1.0, 0.50260127497938123),
    (0.3, 1e-3, 14.406547529041027),
    (0.9, 1e-2, 62.88143924847678),
    (0.1, 5.0, 0.0036944832782554555),
    (0.5, 1.0, 0.46106850444789456),
]
SIGMA_FROZEN = [
    (0.3, 3.6830534463274841),
    (0.7, 2.1086971090919385),
    (-0.3, -3.5144951818198979),
    (-0.7, -2.6307524616624883),
]


def test_gamma_special_values():
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-15)
    assert gamma(0.5) == pytest.approx(1.7724538509055160, rel=1e-14)
    assert gamma(-0.5) == pytest.approx(-3.5449077018110320, rel=1e-14)


def test_sigma_special_values():
    assert sigma(1.0) == pytest.approx(2.0, rel=1e-15)
    assert sigma(0.5) == pytest.approx(2.5066282746310002, rel=1e-14)
    # Gamma(-1/2) 2^(-1/2) = -2 sqrt(pi) / sqrt(2) = -sqrt(2 pi)
    assert sigma(-0.5) == pytest.approx(-2.5066282746310002, rel=1e-14)


@pytest.mark.parametrize("alpha,expected", SIGMA_FROZEN)
def test_sigma_matches_high_precision(alpha, expected):
    assert sigma(alpha) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.0, -3.0 + 5e-10])
def test_gamma_poles_raise(x):
    with pytest.raises(PoleError):
        gamma(x)
    with pytest.raises(PoleError):
        sigma(x)


def test_gamma_near_pole_but_outside_margin():
    assert math.isfinite(gamma(-1.0 + 1e-6))


@given(st.floats(min_value=0.05, max_value=5.0))
def test_gamma_recurrence(x):
    assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-10)


@given(st.floats(min_value=-0.999, max_value=6.0).filter(lambda x: abs(x - round(x)) > 1e-3 or x > 0.5))
def test_gamma_against_stdlib(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


@pytest.mark.parametrize("nu,r,expected", K_FROZEN)
def test_bessel_frozen_values(nu, r, expected):
    assert bessel_k(nu, r) == pytest.approx(expected, rel=1e-13)


def test_bessel_half_order_closed_form():
    r = np.logspace(-2, 1, 200)
    exact = np.sqrt(np.pi / (2 * r)) * np.exp(-r)
    assert np.max(np.abs(bessel_k(0.5, r) - exact) / exact) < 1e-10
    assert bessel_k(0.5, 1.0) == pytest.approx(0.4610685044478946, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99), st.floats(min_value=1e-3, max_value=30.0))
def test_bessel_absolute_error_against_scipy(nu, r):
    assert abs(bessel_k(nu, r) - special.kv(nu, r)) < 1e-12 * max(1.0, special.kv(nu, r))


def test_bessel_even_in_order():
    r = np.array([1e-3, 0.1, 1.0, 7.0])
    assert np.allclose(bessel_k(0.3, r), special.kv(-0.3, r), rtol=1e-13)


@pytest.mark.parametrize("nu", [0.1, 0.3, 0.5, 0.8])
def test_bessel_positive_and_decreasing(nu):
    v = bessel_k(nu, np.logspace(-5, 1.5, 120))
    assert np.all(v > 0)
    assert np.all(np.diff(v) < 0)


def test_bessel_small_argument_asymptotics():
    r = 1e-3
    value = bessel_k(0.3, r)
    leading = 0.5 * sigma(0.3) * r**-0.3
    # the one-term law is 1.5% off here; the r^(+nu) correction closes the gap
    assert value == pytest.approx(leading, rel=2e-2)
    assert value == pytest.approx(leading + 0.5 * sigma(-0.3) * r**0.3, rel=1e-4)


@pytest.mark.parametrize("nu", [0.2, 0.3, 0.6])
def test_bessel_small_argument_law_converges(nu):
    # r^nu K_nu(r) = sigma(nu)/2 + sigma(-nu)/2 r^(2 nu) + ..., so successive gaps shrink by 10^(-2 nu)
    rs = np.array([1e-2, 1e-3, 1e-4])
    gaps = rs**nu * bessel_k(nu, rs) - 0.5 * sigma(nu)
    ratios = gaps[1:] / gaps[:-1]
    assert np.allclose(ratios, 10.0 ** (-2 * nu), rtol=0.05)
    assert abs(gaps[-1]) < abs(gaps[0])


def test_bessel_shapes():
    assert isinstance(bessel_k(0.4, 2.0), float)
    out = bessel_k(0.4, np.ones((3, 4)))
    assert out.shape == (3, 4)


@pytest.mark.parametrize("nu,r", [(0.0, 1.0), (1.0, 1.0), (-0.3, 1.0), (1.5, 1.0), (0.5, 0.0), (0.5, -1.0)])
def test_bessel_domain_errors(nu, r):
    with pytest.raises(DomainError):
        bessel_k(nu, r)
