"""Self-adjoint extension machinery at a single solenoid.

Extensions are labelled by an angle ``tau`` in [0, 2 pi) per solenoid.  Domain
elements are characterized by four boundary coefficients per spinor
component, obtained as scaled angular averages near the solenoid; the
predicates here compare them against the Dirac and Pauli boundary relations
in cross-multiplied form so that tau = 0 and tau = pi need no special case.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import specfun
from .errors import ConfigError, DomainError, ExtractionError
from .field import Solenoid

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12
PREDICATE_TOL = 1e-6

EXTRACTION_R0 = 1e-2
EXTRACTION_LEVELS = 6
EXTRACTION_NODES = 256
EXTRACTION_FIT_TOL = 1e-4
NOISE_FLOOR_REL = 1e-10


@dataclass(frozen=True)
class SpinorSample:
    """Spinor value(s); ``plus`` and ``minus`` may be scalars or arrays."""

    plus: complex | np.ndarray
    minus: complex | np.ndarray

    def __iter__(self):
        yield self.plus
        yield self.minus

    def norm(self):
        return np.sqrt(np.abs(self.plus) ** 2 + np.abs(self.minus) ** 2)


Evaluator = Callable[[np.ndarray], SpinorSample]


def unit_phase(tau: float) -> complex:
    """exp(i tau), exact at integer multiples of pi/2."""
    q = tau / (0.5 * math.pi)
    k = round(q)
    if abs(q - k) < 1e-13:
        return (1 + 0j, 1j, -1 + 0j, -1j)[k % 4]
    return cmath.exp(1j * tau)


def _angle_equal(a: float, b: float) -> bool:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d) <= ANGLE_TOL


def is_zero_angle(tau: float) -> bool:
    return _angle_equal(tau, 0.0)


def is_pi_angle(tau: float) -> bool:
    return _angle_equal(tau, math.pi)


def parse_angle(value) -> tuple[float, Fraction | None]:
    """Parse an angle: a plain number, a Fraction (multiple of pi), or ``"pi:<q>"``."""
    if isinstance(value, Fraction):
        return float(value) * math.pi, value
    if isinstance(value, str):
        text = value.strip()
        if not text.startswith("pi:"):
            raise ConfigError(f"angle strings must look like 'pi:0.5', got {value!r}")
        try:
            q = Fraction(text[3:].strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad multiple of pi in {value!r}") from exc
        return float(q) * math.pi, q
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"angle must be a number or 'pi:<q>' string, got {value!r}")
    return float(value), (Fraction(0) if value == 0 else None)


@dataclass(frozen=True)
class ExtensionSpec:
    """Per-solenoid extension parameters; ``pi_multiples`` holds exact values when known."""

    taus: tuple[float, ...]
    pi_multiples: tuple[Fraction | None, ...] = field(default=())

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        exact = tuple(self.pi_multiples) or (None,) * len(taus)
        if len(exact) != len(taus):
            raise ConfigError("pi_multiples must match taus in length")
        for t, q in zip(taus, exact):
            if not 0.0 <= t < TWO_PI:
                raise ConfigError(f"tau must lie in [0, 2 pi), got {t}")
            if q is not None and not 0 <= q < 2:
                raise ConfigError(f"tau must lie in [0, 2 pi), got pi*{q}")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "pi_multiples", exact)

    @classmethod
    def parse(cls, values: Sequence) -> "ExtensionSpec":
        parsed = [parse_angle(v) for v in values]
        return cls(tuple(p[0] for p in parsed), tuple(p[1] for p in parsed))

    @classmethod
    def uniform(cls, tau, n: int) -> "ExtensionSpec":
        return cls.parse([tau] * n)

    def __len__(self) -> int:
        return len(self.taus)

    def is_uniform(self) -> bool:
        return all(_angle_equal(t, self.taus[0]) for t in self.taus)


# ---------------------------------------------------------------------------
# deficiency elements and Krein samples


def _polar(z, center: complex):
    w = np.asarray(z, dtype=complex) - center
    r = np.abs(w)
    if np.any(r == 0.0):
        raise DomainError("deficiency elements are singular at the solenoid")
    return r, w / r


def deficiency_element(sign: int, alpha: float, z, center: complex = 0j) -> SpinorSample:
    """xi_(+/-)(r e^{i theta}) = (K_{1-alpha}(r) e^{-i theta}, +/- K_alpha(r))."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    r, phase = _polar(z, center)
    return SpinorSample(specfun.bessel_k(1.0 - alpha, r) * np.conj(phase), sign * specfun.bessel_k(alpha, r) + 0j)


def krein_sample(alpha: float, tau: float, mu: complex, z, center: complex = 0j) -> SpinorSample:
    """mu (xi_+ + e^{i tau} xi_-): the singular part of a domain element."""
    e = unit_phase(tau)
    r, phase = _polar(z, center)
    plus = mu * (1 + e) * specfun.bessel_k(1.0 - alpha, r) * np.conj(phase)
    minus = mu * (1 - e) * specfun.bessel_k(alpha, r)
    return SpinorSample(plus + 0j, minus + 0j)


def flipped_krein_sample(alpha: float, tau_prime: float, mu: complex, z, center: complex = 0j) -> SpinorSample:
    """Domain element of the reversed field -B at intensity 1 - alpha, parameter tau_prime.

    The potential -h differs from (1 - alpha) log r by the harmonic term
    -log r, which is the gauge factor e^{i theta} on both components.
    """
    s = krein_sample(1.0 - alpha, tau_prime, mu, z, center)
    _, phase = _polar(z, center)
    return SpinorSample(phase * s.plus, phase * s.minus)


def spin_flip_V(s: SpinorSample) -> SpinorSample:
    """(psi_+, psi_-) -> (conj psi_-, conj psi_+)."""
    return SpinorSample(np.conj(s.minus), np.conj(s.plus))


def spin_swap_W(s: SpinorSample) -> SpinorSample:
    """(psi_+, psi_-) -> (psi_-, psi_+)."""
    return SpinorSample(s.minus, s.plus)


def gauge_factor(centers: Sequence[complex], z):
    """exp(-2 i sum_j theta_j), theta_j the angle of z about z_j."""
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    for c in centers:
        w = z - c
        out = out * (np.conj(w) / np.abs(w)) ** 2
    return out


# ---------------------------------------------------------------------------
# boundary data


@dataclass(frozen=True)
class ComponentCoefficients:
    c_minus_alpha: complex = 0j
    c_alpha: complex = 0j
    c_alpha_minus_1: complex = 0j
    c_1_minus_alpha: complex = 0j

    def as_dict(self) -> dict[str, complex]:
        return {
            "c_minus_alpha": self.c_minus_alpha,
            "c_alpha": self.c_alpha,
            "c_alpha_minus_1": self.c_alpha_minus_1,
            "c_1_minus_alpha": self.c_1_minus_alpha,
        }


@dataclass(frozen=True)
class BoundaryData:
    """Boundary coefficients of both spinor components at one solenoid.

    ``errors`` maps "plus.c_alpha"-style keys to fit error estimates;
    ``noise_floor`` is the magnitude below which a coefficient is numerically
    indistinguishable from zero (0 for synthesized data).
    """

    alpha: float
    plus: ComponentCoefficients
    minus: ComponentCoefficients
    errors: dict[str, float] = field(default_factory=dict)
    noise_floor: float = 0.0


def angular_coefficients(evaluator: Evaluator, center: complex, radii: np.ndarray, nodes: int = EXTRACTION_NODES):
    """Trapezoid-rule Fourier coefficients a_0(r), a_1(r) for each component.

    Returns an array of shape (2 components, 2 modes, len(radii)) where mode
    l weights the samples with e^{i l theta}.
    """
    theta = TWO_PI * np.arange(nodes) / nodes
    ring = np.exp(1j * theta)
    z = center + radii[:, None] * ring[None, :]
    s = evaluator(z)
    out = np.empty((2, 2, len(radii)), dtype=complex)
    for ci, comp in enumerate((s.plus, s.minus)):
        comp = np.broadcast_to(np.asarray(comp, dtype=complex), z.shape)
        out[ci, 0] = comp.mean(axis=1)
        out[ci, 1] = (comp * ring[None, :]).mean(axis=1)
    return out


def _ladder_fit(radii: np.ndarray, y: np.ndarray, s: float):
    # y(r) = c0 + c1 r^s + c2 r^2 + c3 r^(s+2) + c4 r^4
    exps = np.array([0.0, s, 2.0, s + 2.0, 4.0])
    A = radii[:, None] ** exps[None, :]
    scale = np.abs(A).max(axis=0)
    An = A / scale
    coef, *_ = np.linalg.lstsq(An.astype(complex), y, rcond=None)
    resid = y - An @ coef
    dof = max(len(radii) - len(exps), 1)
    rms = math.sqrt(float(np.sum(np.abs(resid) ** 2)) / dof)
    cov = np.linalg.inv(An.T @ An)
    err = rms * np.sqrt(np.diag(cov)) / scale
    return coef / scale, err, float(np.max(np.abs(resid)))


def extract_boundary_data(
    evaluator: Evaluator,
    solenoid: Solenoid,
    r0: float = EXTRACTION_R0,
    levels: int = EXTRACTION_LEVELS,
    nodes: int = EXTRACTION_NODES,
) -> BoundaryData:
    """Fit the four boundary coefficients of each component at ``solenoid``.

    The l = 0 mode is scaled by r^alpha and the l = 1 mode by r^(1 - alpha);
    each is then fitted on radii r0 4^-k against the exponent ladder
    {0, s, 2, s + 2, 4}, with s = 2 alpha and s = 2 - 2 alpha respectively.
    """
    alpha = solenoid.alpha
    radii = r0 * 4.0 ** -np.arange(levels)
    a = angular_coefficients(evaluator, solenoid.center, radii, nodes)
    channels = {
        0: (radii**alpha, 2.0 * alpha, "c_minus_alpha", "c_alpha"),
        1: (radii ** (1.0 - alpha), 2.0 - 2.0 * alpha, "c_alpha_minus_1", "c_1_minus_alpha"),
    }
    ys = {(ci, l): channels[l][0] * a[ci, l] for ci in range(2) for l in range(2)}
    data_scale = max(float(np.max(np.abs(y))) for y in ys.values())
    noise_floor = NOISE_FLOOR_REL * data_scale

    coeffs: list[dict[str, complex]] = [{}, {}]
    errors: dict[str, float] = {}
    for (ci, l), y in ys.items():
        _, s, lead_name, sub_name = channels[l]
        coef, err, resid = _ladder_fit(radii, y, s)
        label = "plus" if ci == 0 else "minus"
        if resid > EXTRACTION_FIT_TOL * (abs(coef[0]) + 1e-30) + noise_floor:
            raise ExtractionError(
                f"{label}.{lead_name}: fit residual {resid:.3e} exceeds tolerance at alpha={alpha}"
            )
        coeffs[ci][lead_name] = complex(coef[0])
        coeffs[ci][sub_name] = complex(coef[1])
        errors[f"{label}.{lead_name}"] = float(err[0])
        errors[f"{label}.{sub_name}"] = float(err[1])
    return BoundaryData(
        alpha=alpha,
        plus=ComponentCoefficients(**coeffs[0]),
        minus=ComponentCoefficients(**coeffs[1]),
        errors=errors,
        noise_floor=noise_floor,
    )


def krein_boundary_values(alpha: float, tau: float, mu: complex) -> dict[str, complex]:
    """Closed-form leading coefficients of krein_sample(alpha, tau, mu)."""
    e = unit_phase(tau)
    return {
        "plus.c_minus_alpha": 0j,
        "minus.c_minus_alpha": mu / 2 * (1 - e) * specfun.sigma(alpha),
        "plus.c_alpha_minus_1": mu / 2 * (1 + e) * specfun.sigma(1 - alpha),
        "minus.c_alpha_minus_1": 0j,
    }


def pauli_boundary_data(
    alpha: float,
    tau: float,
    mu: complex,
    nu: complex,
    plus_c_alpha: complex = 0j,
    minus_c_1_minus_alpha: complex = 0j,
) -> BoundaryData:
    """Boundary data of a squared-Dirac domain element from its constants mu, nu."""
    e = unit_phase(tau)
    plus = ComponentCoefficients(
        c_minus_alpha=0j,
        c_alpha=plus_c_alpha,
        c_alpha_minus_1=mu / 2 * (1 + e) * specfun.sigma(1 - alpha),
        c_1_minus_alpha=-1j * nu / 2 * (1 - e) * specfun.sigma(alpha - 1),
    )
    minus = ComponentCoefficients(
        c_minus_alpha=mu / 2 * (1 - e) * specfun.sigma(alpha),
        c_alpha=-1j * nu / 2 * (1 + e) * specfun.sigma(-alpha),
        c_alpha_minus_1=0j,
        c_1_minus_alpha=minus_c_1_minus_alpha,
    )
    return BoundaryData(alpha=alpha, plus=plus, minus=minus)


def table1_boundary_data(kind: str, alpha: float, rng: np.random.Generator) -> BoundaryData:
    """Random boundary data obeying the Maximal ("MAX") or EV coefficient pattern."""

    def arb():
        return complex(rng.normal(), rng.normal())

    if kind == "MAX":
        plus = ComponentCoefficients(0j, arb(), arb(), 0j)
        minus = ComponentCoefficients(arb(), 0j, 0j, arb())
    elif kind == "EV" and alpha < 0.5:
        plus = ComponentCoefficients(0j, arb(), 0j, arb())
        minus = ComponentCoefficients(arb(), 0j, 0j, arb())
    elif kind == "EV":
        plus = ComponentCoefficients(0j, arb(), arb(), 0j)
        minus = ComponentCoefficients(0j, arb(), 0j, arb())
    else:
        raise ValueError(f"unknown Pauli operator kind {kind!r}")
    return BoundaryData(alpha=alpha, plus=plus, minus=minus)


# ---------------------------------------------------------------------------
# domain predicates


@dataclass(frozen=True)
class ConditionCheck:
    ok: bool
    residual: float

    def __bool__(self) -> bool:
        return self.ok


def _ratio(num: float, den: float) -> float:
    if num == 0.0:
        return 0.0
    return num / den if den > 0.0 else math.inf


def _cross_residual(lhs_c, lhs_w, rhs_c, rhs_w, e, floor):
    # lhs_c lhs_w (1 - e) = rhs_c rhs_w (1 + e)
    cross = lhs_c * lhs_w * (1 - e) - rhs_c * rhs_w * (1 + e)
    scale = 2.0 * max(abs(lhs_c * lhs_w), abs(rhs_c * rhs_w), floor * max(abs(lhs_w), abs(rhs_w)))
    return _ratio(abs(cross), scale)


def _vanishing_residual(values, zeros, floor):
    scale = max([abs(v) for v in values] + [floor])
    return max((_ratio(abs(z), scale) for z in zeros), default=0.0)


def check_dirac_condition(bd: BoundaryData, tau: float, tol: float = PREDICATE_TOL) -> ConditionCheck:
    """Dirac domain relation at one solenoid, cross-multiplied form."""
    a = bd.alpha
    e = unit_phase(tau)
    floor = bd.noise_floor / tol
    p, m = bd.plus, bd.minus
    r1 = _cross_residual(p.c_alpha_minus_1, specfun.sigma(a), m.c_minus_alpha, specfun.sigma(1 - a), e, floor)
    r0 = _vanishing_residual(
        [p.c_alpha_minus_1, m.c_minus_alpha, p.c_minus_alpha, m.c_alpha_minus_1],
        [p.c_minus_alpha, m.c_alpha_minus_1],
        floor,
    )
    residual = max(r1, r0)
    return ConditionCheck(residual <= tol, residual)


def check_pauli_condition(bd: BoundaryData, tau: float, tol: float = PREDICATE_TOL) -> ConditionCheck:
    """Squared-Dirac (Pauli) domain relations at one solenoid."""
    a = bd.alpha
    e = unit_phase(tau)
    floor = bd.noise_floor / tol
    p, m = bd.plus, bd.minus
    r1 = _cross_residual(p.c_alpha_minus_1, specfun.sigma(a), m.c_minus_alpha, specfun.sigma(1 - a), e, floor)
    r2 = _cross_residual(m.c_alpha, specfun.sigma(a - 1), p.c_1_minus_alpha, specfun.sigma(-a), e, floor)
    r0 = _vanishing_residual(
        [p.c_alpha_minus_1, m.c_minus_alpha, p.c_minus_alpha, m.c_alpha_minus_1],
        [p.c_minus_alpha, m.c_alpha_minus_1],
        floor,
    )
    residual = max(r1, r2, r0)
    return ConditionCheck(residual <= tol, residual)


# ---------------------------------------------------------------------------
# spin-flip equivalences


def _pairwise(tau_prime: ExtensionSpec, tau: ExtensionSpec):
    if len(tau_prime) != len(tau):
        raise ConfigError("tau vectors differ in length")
    return zip(tau_prime.taus, tau_prime.pi_multiples, tau.taus, tau.pi_multiples)


def v_equivalent(tau_prime: ExtensionSpec, tau: ExtensionSpec) -> bool:
    """Anti-unitary equivalence of D^{tau', -h} and D^{tau, h} through V."""
    for tp, qp, t, q in _pairwise(tau_prime, tau):
        if qp is not None and q is not None:
            if qp + q not in (1, 3):
                return False
        elif min(abs(tp + t - math.pi), abs(tp + t - 3 * math.pi)) > ANGLE_TOL:
            return False
    return True


def w_equivalent(tau_prime: ExtensionSpec, tau: ExtensionSpec) -> bool:
    """Unitary equivalence through W composed with the spin-up gauge factor."""
    for tp, qp, t, q in _pairwise(tau_prime, tau):
        if qp is not None and q is not None:
            if abs(qp - q) != 1:
                return False
        elif abs(abs(tp - t) - math.pi) > ANGLE_TOL:
            return False
    return True


def spin_flip_boundary_check(
    alpha: float, tau_prime: float, tau: float, kind: str = "V", mu: complex = 1.0 + 0.5j
) -> ConditionCheck:
    """Numerical boundary-level test of the V (or W) equivalence at one solenoid.

    Builds a domain element of D^{tau', -h} at the origin, maps it with V
    (or W plus gauge), re-extracts boundary data at intensity ``alpha`` and
    tests the Dirac relation for ``tau``.
    """
    if kind not in ("V", "W"):
        raise ValueError("kind must be 'V' or 'W'")

    def mapped(z):
        s = flipped_krein_sample(alpha, tau_prime, mu, z)
        if kind == "V":
            return spin_flip_V(s)
        w = spin_swap_W(s)
        return SpinorSample(gauge_factor([0j], z) * w.plus, w.minus)

    bd = extract_boundary_data(mapped, Solenoid(0j, alpha))
    return check_dirac_condition(bd, tau)


# ---------------------------------------------------------------------------
# EV / Maximal classification


class Table1Label(str, Enum):
    EV_MATCH = "EV_MATCH"
    MAX_MATCH_IMPOSSIBLE = "MAX_MATCH_IMPOSSIBLE"
    GENERIC_SQUARED_DIRAC = "GENERIC_SQUARED_DIRAC"


@dataclass(frozen=True)
class ExtensionClassification:
    labels: tuple[Table1Label, ...]
    ev_is_square: bool
    max_is_square: bool = False
    max_label: Table1Label = Table1Label.MAX_MATCH_IMPOSSIBLE


def ev_tau(alpha: float) -> float:
    """The tau for which the EV operator is the square of D at this solenoid."""
    return math.pi if alpha < 0.5 else 0.0


def classify_extension(alphas: Sequence[float], taus: ExtensionSpec) -> ExtensionClassification:
    if len(alphas) != len(taus):
        raise ConfigError("alphas and taus differ in length")
    labels = []
    for a, t in zip(alphas, taus.taus):
        match = is_pi_angle(t) if a < 0.5 else is_zero_angle(t)
        labels.append(Table1Label.EV_MATCH if match else Table1Label.GENERIC_SQUARED_DIRAC)
    return ExtensionClassification(
        labels=tuple(labels),
        ev_is_square=all(lab is Table1Label.EV_MATCH for lab in labels),
    )


def pattern_is_square(kind: str, alpha: float, tau: float, rng: np.random.Generator, samples: int = 4) -> bool:
    """Whether every sampled boundary datum of pattern ``kind`` satisfies the Pauli relations."""
    return all(check_pauli_condition(table1_boundary_data(kind, alpha, rng), tau).ok for _ in range(samples))
