from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solenoid_modes.errors import ConfigError, DomainError, ExtractionError
from solenoid_modes.extension import (
    BoundaryData,
    ComponentCoefficients,
    ExtensionSpec,
    SpinorSample,
    Table1Label,
    check_dirac_condition,
    check_pauli_condition,
    classify_extension,
    deficiency_element,
    extract_boundary_data,
    flipped_krein_sample,
    gauge_factor,
    krein_boundary_values,
    krein_sample,
    parse_angle,
    pattern_is_square,
    pauli_boundary_data,
    spin_flip_boundary_check,
    spin_flip_V,
    spin_swap_W,
    table1_boundary_data,
    unit_phase,
    v_equivalent,
    w_equivalent,
)
from solenoid_modes.field import Solenoid
from solenoid_modes.specfun import bessel_k, sigma

K_HALF_1 = 0.46106850444789456  # mpmath
K_03_1 = 0.43507602420880202
K_07_1 = 0.50260127497938123

alphas = st.floats(min_value=0.05, max_value=0.95)
angles = st.floats(min_value=0.0, max_value=2 * math.pi, exclude_max=True)
mus = st.complex_numbers(min_magnitude=0.1, max_magnitude=10.0, allow_nan=False, allow_infinity=False)


def test_unit_phase_exact_quarter_turns():
    assert unit_phase(0.0) == 1
    assert unit_phase(math.pi / 2) == 1j
    assert unit_phase(math.pi) == -1
    assert unit_phase(1.5 * math.pi) == -1j
    assert unit_phase(1.0) == pytest.approx(complex(math.cos(1), math.sin(1)))


def test_deficiency_element_examples():
    s = deficiency_element(1, 0.5, 1.0)
    assert complex(s.plus) == pytest.approx(K_HALF_1, rel=1e-14)
    assert complex(s.minus) == pytest.approx(K_HALF_1, rel=1e-14)
    s = deficiency_element(-1, 0.5, 1.0)
    assert complex(s.minus) == pytest.approx(-K_HALF_1, rel=1e-14)
    s = deficiency_element(1, 0.3, 1j)
    assert complex(s.plus) == pytest.approx(-1j * K_07_1, rel=1e-13)
    assert complex(s.minus) == pytest.approx(K_03_1, rel=1e-13)


def test_deficiency_element_domain():
    with pytest.raises(DomainError):
        deficiency_element(1, 0.5, 0.0)
    with pytest.raises(DomainError):
        krein_sample(0.5, 1.0, 1.0, 2.0, center=2.0)
    with pytest.raises(ValueError):
        deficiency_element(0, 0.5, 1.0)


@given(alphas, st.floats(0.05, 5.0), angles)
def test_krein_sample_cancellations(alpha, r, theta):
    z = r * np.exp(1j * theta)
    s0 = krein_sample(alpha, 0.0, 1.0, z)
    assert s0.minus == 0
    assert complex(s0.plus) == pytest.approx(2 * bessel_k(1 - alpha, r) * np.exp(-1j * theta), rel=1e-13)
    s1 = krein_sample(alpha, math.pi, 1.0, z)
    assert s1.plus == 0
    assert complex(s1.minus) == pytest.approx(2 * bessel_k(alpha, r), rel=1e-13)


def test_krein_sample_quarter_turn():
    s = krein_sample(0.5, math.pi / 2, 1.0, 1.0)
    assert complex(s.plus) == pytest.approx((1 + 1j) * K_HALF_1, rel=1e-14)
    assert complex(s.minus) == pytest.approx((1 - 1j) * K_HALF_1, rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(alphas, angles, mus)
def test_extraction_reproduces_closed_forms(alpha, tau, mu):
    bd = extract_boundary_data(lambda z: krein_sample(alpha, tau, mu, z), Solenoid(0, alpha))
    expected = krein_boundary_values(alpha, tau, mu)
    scale = max(abs(v) for v in expected.values())
    got = {
        "plus.c_minus_alpha": bd.plus.c_minus_alpha,
        "minus.c_minus_alpha": bd.minus.c_minus_alpha,
        "plus.c_alpha_minus_1": bd.plus.c_alpha_minus_1,
        "minus.c_alpha_minus_1": bd.minus.c_alpha_minus_1,
    }
    for k, v in expected.items():
        assert abs(got[k] - v) <= 1e-6 * scale
    # subleading coefficients of the Bessel expansion; near alpha = 0 or 1 the
    # r^(2 alpha) column is almost collinear with the constant one, so allow 1e-5
    e = unit_phase(tau)
    assert abs(bd.minus.c_alpha - mu / 2 * (1 - e) * sigma(-alpha)) <= 1e-5 * scale
    assert abs(bd.plus.c_1_minus_alpha - mu / 2 * (1 + e) * sigma(alpha - 1)) <= 1e-5 * scale
    assert check_dirac_condition(bd, tau)


def test_extraction_off_center_solenoid():
    c = 1.5 - 0.5j
    bd = extract_boundary_data(lambda z: krein_sample(0.35, 2.0, 0.7j, z, center=c), Solenoid(c, 0.35))
    exp = krein_boundary_values(0.35, 2.0, 0.7j)
    assert bd.minus.c_minus_alpha == pytest.approx(exp["minus.c_minus_alpha"], rel=1e-8)
    assert bd.plus.c_alpha_minus_1 == pytest.approx(exp["plus.c_alpha_minus_1"], rel=1e-8)
    assert set(bd.errors) == {f"{c}.{k}" for c in ("plus", "minus") for k in ComponentCoefficients().as_dict()}
    leading = [k for k in bd.errors if k.endswith(("c_minus_alpha", "c_alpha_minus_1"))]
    assert all(bd.errors[k] < 1e-10 for k in leading)
    assert all(err < 1e-6 for err in bd.errors.values())


@pytest.mark.parametrize(
    "psi",
    [
        lambda z: SpinorSample(0 * z, np.abs(z) ** -0.4 * (1 + 0.3 * np.log(np.abs(z)))),
        lambda z: SpinorSample(0 * z, np.abs(z) ** -1.5 + 0 * z),
        lambda z: SpinorSample(np.exp(z), 0 * z),
    ],
)
def test_extraction_error_outside_model(psi):
    with pytest.raises(ExtractionError):
        extract_boundary_data(psi, Solenoid(0, 0.4))


def test_exact_zero_functionals():
    bd = extract_boundary_data(lambda z: krein_sample(0.5, 0.0, 1.0, z), Solenoid(0, 0.5))
    assert bd.minus.c_minus_alpha == 0
    bd = extract_boundary_data(lambda z: krein_sample(0.9, math.pi, 1.0, z), Solenoid(0, 0.9))
    assert bd.plus.c_alpha_minus_1 == 0


@settings(max_examples=20, deadline=None)
@given(alphas, st.integers(0, 11), st.integers(0, 11))
def test_dirac_condition_distinguishes_tau(alpha, k, kp):
    tau, tau_p = k * math.pi / 6, kp * math.pi / 6
    bd = extract_boundary_data(lambda z: krein_sample(alpha, tau, 1 - 0.5j, z), Solenoid(0, alpha))
    assert check_dirac_condition(bd, tau_p).ok == (k == kp)


def test_dirac_condition_rejects_nonzero_forbidden_coefficient():
    bd = BoundaryData(0.4, ComponentCoefficients(c_minus_alpha=1.0), ComponentCoefficients())
    check = check_dirac_condition(bd, 1.0)
    assert not check.ok and check.residual == pytest.approx(1.0)


@given(alphas, angles, mus, mus, mus, mus)
def test_pauli_condition_holds_for_squared_dirac_data(alpha, tau, mu, nu, x, y):
    bd = pauli_boundary_data(alpha, tau, mu, nu, plus_c_alpha=x, minus_c_1_minus_alpha=y)
    assert check_pauli_condition(bd, tau)
    assert check_dirac_condition(bd, tau)


def test_pauli_condition_at_pi_forces_plus_leading_zero():
    # cross form at tau = pi: c+_{a-1} sigma(a) * 2 = c-_{-a} sigma(1-a) * 0
    good = BoundaryData(0.3, ComponentCoefficients(), ComponentCoefficients(c_minus_alpha=2.0))
    bad = BoundaryData(0.3, ComponentCoefficients(c_alpha_minus_1=1.0), ComponentCoefficients(c_minus_alpha=2.0))
    assert check_pauli_condition(good, math.pi)
    assert not check_pauli_condition(bad, math.pi)


def test_pauli_condition_detects_violation_of_last_relation_only():
    base = pauli_boundary_data(0.6, 1.0, 1.0, 0.5)
    assert check_pauli_condition(base, 1.0)
    broken = BoundaryData(
        base.alpha,
        base.plus,
        ComponentCoefficients(base.minus.c_minus_alpha, base.minus.c_alpha, 0.3, base.minus.c_1_minus_alpha),
    )
    assert not check_pauli_condition(broken, 1.0)


def test_spin_flip_maps():
    s = spin_flip_V(SpinorSample(1, 1j))
    assert (s.plus, s.minus) == (-1j, 1)
    w = spin_swap_W(SpinorSample(1, 1j))
    assert (w.plus, w.minus) == (1j, 1)


@given(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6),
       st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6))
def test_spin_flip_involution(a, b):
    s = spin_flip_V(spin_flip_V(SpinorSample(a, b)))
    assert (s.plus, s.minus) == (a, b)


def test_gauge_factor_unit_modulus():
    z = np.array([1 + 1j, -2 + 0.5j, 3j])
    g = gauge_factor([0, 1], z)
    assert np.allclose(np.abs(g), 1)
    assert g[0] == pytest.approx(np.exp(-2j * (np.angle(1 + 1j) + np.angle(1j))))


def test_flipped_sample_is_reversed_field_domain_element():
    # -h = (1 - a) log r - log r, so e^{-i theta} times the flipped sample is a Krein sample at 1 - a
    z = np.array([0.3 + 0.4j])
    s = flipped_krein_sample(0.3, 1.0, 1.0, z)
    k = krein_sample(0.7, 1.0, 1.0, z)
    ph = np.conj(z / np.abs(z))
    assert np.allclose(s.plus * ph, k.plus) and np.allclose(s.minus * ph, k.minus)


def test_parse_angle():
    assert parse_angle("pi:0.5") == (math.pi / 2, Fraction(1, 2))
    assert parse_angle("pi:3/2") == (1.5 * math.pi, Fraction(3, 2))
    assert parse_angle(1.25) == (1.25, None)
    assert parse_angle(0) == (0.0, Fraction(0))
    for bad in ("0.5", "pi:x", True, None):
        with pytest.raises(ConfigError):
            parse_angle(bad)


def test_extension_spec_validation():
    with pytest.raises(ConfigError):
        ExtensionSpec((7.0,))
    with pytest.raises(ConfigError):
        ExtensionSpec.parse(["pi:2"])
    with pytest.raises(ConfigError):
        ExtensionSpec((1.0, 2.0), (None,))
    spec = ExtensionSpec.uniform("pi:1", 3)
    assert len(spec) == 3 and spec.is_uniform() and spec.pi_multiples == (Fraction(1),) * 3


def test_v_equivalent_examples():
    half = ExtensionSpec.parse(["pi:1/2"])
    assert v_equivalent(half, half)
    assert v_equivalent(ExtensionSpec.parse(["pi:1"]), ExtensionSpec.parse([0]))
    q = ExtensionSpec.parse(["pi:1/4"])
    assert not v_equivalent(q, q)
    # float inputs near the exact values use the 1e-12 tolerance
    assert v_equivalent(ExtensionSpec((math.pi / 2,)), ExtensionSpec((math.pi / 2 + 1e-13,)))
    assert not v_equivalent(ExtensionSpec((math.pi / 2,)), ExtensionSpec((math.pi / 2 + 1e-9,)))


def test_w_equivalent_examples():
    assert w_equivalent(ExtensionSpec.parse(["pi:3/2"]), ExtensionSpec.parse(["pi:1/2"]))
    assert not w_equivalent(ExtensionSpec.parse([0]), ExtensionSpec.parse([0]))
    assert w_equivalent(ExtensionSpec.parse(["pi:1", 0]), ExtensionSpec.parse([0, "pi:1"]))
    with pytest.raises(ConfigError):
        w_equivalent(ExtensionSpec.parse([0]), ExtensionSpec.parse([0, 0]))


@pytest.mark.parametrize("k,kp", [(3, 3), (9, 3), (0, 6), (2, 2), (1, 7)])
def test_spin_flip_boundary_check_samples(k, kp):
    tau, tau_p = ExtensionSpec.parse([f"pi:{k}/6"]), ExtensionSpec.parse([f"pi:{kp}/6"])
    assert spin_flip_boundary_check(0.3, tau_p.taus[0], tau.taus[0], "V").ok == v_equivalent(tau_p, tau)
    assert spin_flip_boundary_check(0.3, tau_p.taus[0], tau.taus[0], "W").ok == w_equivalent(tau_p, tau)


def test_classify_examples():
    lab = classify_extension([0.3], ExtensionSpec.parse(["pi:1"])).labels
    assert lab == (Table1Label.EV_MATCH,)
    assert classify_extension([0.7], ExtensionSpec.parse([0])).labels == (Table1Label.EV_MATCH,)
    assert classify_extension([0.3], ExtensionSpec.parse(["pi:1/2"])).labels == (Table1Label.GENERIC_SQUARED_DIRAC,)
    assert classify_extension([0.5], ExtensionSpec.parse([0])).labels == (Table1Label.EV_MATCH,)
    both = classify_extension([0.3, 0.7], ExtensionSpec.parse(["pi:1", 0]))
    assert both.ev_is_square and not both.max_is_square
    assert not classify_extension([0.3], ExtensionSpec.parse([0])).ev_is_square


@settings(max_examples=40, deadline=None)
@given(alphas, st.integers(0, 11), st.integers(0, 2**32 - 1))
def test_classifier_agrees_with_pauli_predicate(alpha, k, seed):
    rng = np.random.default_rng(seed)
    tau = k * math.pi / 6
    label = classify_extension([alpha], ExtensionSpec((tau,))).labels[0]
    assert label is not Table1Label.MAX_MATCH_IMPOSSIBLE
    assert pattern_is_square("EV", alpha, tau, rng) == (label is Table1Label.EV_MATCH)
    assert not pattern_is_square("MAX", alpha, tau, rng)


def test_table1_unknown_kind():
    with pytest.raises(ValueError):
        table1_boundary_data("XYZ", 0.3, np.random.default_rng(0))
