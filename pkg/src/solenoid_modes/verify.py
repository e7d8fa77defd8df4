"""Independent numerical checks for constructed modes and boundary data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import SingularPointError, StepError
from .extension import (
    Evaluator,
    SpinorSample,
    extract_boundary_data,
    krein_boundary_values,
    krein_sample,
    unit_phase,
)
from .field import FieldConfig, Solenoid, potential, total_flux
from .kernelsolver import (
    ModeDescriptor,
    ZeroModeBasis,
    evaluate_descriptor,
    null_space,
    solenoid_scales,
)

FD_STEP = 1e-4
TEST_POINTS = 50
TEST_RADIUS = 10.0
FEATURE_CLEARANCE = 0.5
INNER_RADII = np.logspace(-6, -1, 11)
OUTER_RADII = np.array([10.0, 20.0, 40.0, 80.0])
INNER_FIT_RINGS = 4

__all__ = [
    "ResidualReport",
    "QuadratureReport",
    "apply_dirac_action",
    "annihilation_residual",
    "mode_residual",
    "sample_points",
    "l2_check",
    "null_space",
    "functional_oracle",
    "brute_force_kernel_dimension",
    "gram_condition",
    "perturbed",
]


@dataclass(frozen=True)
class ResidualReport:
    max_relative_residual: float
    points_tested: int
    worst_point: complex


@dataclass(frozen=True)
class QuadratureReport:
    inner_integrals: tuple[float, ...]
    inner_exponents: tuple[float, ...]
    outer_exponent: float
    is_l2: bool

    @property
    def inner_converged(self) -> bool:
        return all(e > -2.0 for e in self.inner_exponents)


# ---------------------------------------------------------------------------
# finite-difference Dirac action

_STENCIL = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))


def apply_dirac_action(evaluator: Evaluator, cfg: FieldConfig, z, step: float = FD_STEP) -> SpinorSample:
    """d^h psi = (q_- psi_-, q_+ psi_+) by 4th-order central differences.

    q_+ u = -2i d/dzbar (u e^{-h}) e^h and q_- u = -2i d/dz (u e^h) e^{-h}.
    """
    if not 1e-6 <= step <= 1e-1:
        raise StepError(f"step must lie in [1e-6, 1e-1], got {step}")
    z = np.asarray(z, dtype=complex)
    if cfg.n and np.any(np.abs(z[..., None] - cfg.centers) <= 10 * step):
        raise SingularPointError("finite-difference stencil reaches a solenoid")

    def products(w):
        s = evaluator(w)
        h = potential(cfg, w)
        plus = np.broadcast_to(s.plus, w.shape) * np.exp(-h)
        minus = np.broadcast_to(s.minus, w.shape) * np.exp(h)
        return plus, minus

    dx_p = dx_m = dy_p = dy_m = 0j
    for k, c in _STENCIL:
        p, m = products(z + k * step)
        dx_p, dx_m = dx_p + c * p, dx_m + c * m
        p, m = products(z + 1j * k * step)
        dy_p, dy_m = dy_p + c * p, dy_m + c * m
    dx_p, dx_m, dy_p, dy_m = (d / step for d in (dx_p, dx_m, dy_p, dy_m))
    h = potential(cfg, z)
    q_plus = -1j * (dx_p + 1j * dy_p) * np.exp(h)
    q_minus = -1j * (dx_m - 1j * dy_m) * np.exp(-h)
    return SpinorSample(q_minus, q_plus)


def sample_points(cfg: FieldConfig, count: int = TEST_POINTS, seed: int = 0) -> np.ndarray:
    """Seeded points in |z| <= 10 clear of solenoids and bump supports by 0.5."""
    rng = np.random.default_rng(seed)
    pts: list[complex] = []
    for _ in range(200):
        r = TEST_RADIUS * np.sqrt(rng.random(4 * count))
        w = r * np.exp(2j * np.pi * rng.random(4 * count))
        ok = np.ones(w.shape, dtype=bool)
        for c in cfg.centers:
            ok &= np.abs(w - c) >= FEATURE_CLEARANCE
        for b in cfg.bumps:
            ok &= np.abs(w - b.center) >= b.radius + FEATURE_CLEARANCE
        pts.extend(w[ok].tolist())
        if len(pts) >= count:
            return np.array(pts[:count])
    raise ValueError("no room for annihilation test points: features cover the test disc")


def mode_residual(evaluator: Evaluator, cfg: FieldConfig, points: np.ndarray, step: float = FD_STEP) -> ResidualReport:
    """max |d^h psi| / (|psi| + 1e-30) over ``points``."""
    if len(points) == 0:
        raise ValueError("empty test set")
    d = apply_dirac_action(evaluator, cfg, points, step)
    s = evaluator(points)
    rel = np.sqrt(np.abs(d.plus) ** 2 + np.abs(d.minus) ** 2) / (
        np.sqrt(np.abs(np.broadcast_to(s.plus, points.shape)) ** 2 + np.abs(np.broadcast_to(s.minus, points.shape)) ** 2)
        + 1e-30
    )
    i = int(np.argmax(rel))
    return ResidualReport(float(rel[i]), len(points), complex(points[i]))


def annihilation_residual(basis: ZeroModeBasis, cfg: FieldConfig, step: float = FD_STEP) -> ResidualReport:
    if basis.count == 0:
        raise ValueError("annihilation residual needs a nonempty basis")
    pts = sample_points(cfg)
    worst = ResidualReport(0.0, 0, 0j)
    for desc in basis.modes:
        rep = mode_residual(lambda w, d=desc: evaluate_descriptor(d, cfg, w), cfg, pts, step)
        if rep.max_relative_residual >= worst.max_relative_residual:
            worst = ResidualReport(rep.max_relative_residual, worst.points_tested + len(pts), rep.worst_point)
        else:
            worst = ResidualReport(worst.max_relative_residual, worst.points_tested + len(pts), worst.worst_point)
    return worst


def perturbed(evaluator: Evaluator, eps: float = 1e-2) -> Evaluator:
    """psi (1 + eps Re z): a non-holomorphic corruption of a mode."""

    def ev(z):
        s = evaluator(z)
        f = 1.0 + eps * np.real(z)
        return SpinorSample(s.plus * f, s.minus * f)

    return ev


# ---------------------------------------------------------------------------
# square integrability


def _ring_average(evaluator: Evaluator, center: complex, radii: np.ndarray, nodes: int) -> np.ndarray:
    theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    z = center + radii[:, None] * np.exp(1j * theta)[None, :]
    s = evaluator(z)
    dens = np.abs(np.broadcast_to(s.plus, z.shape)) ** 2 + np.abs(np.broadcast_to(s.minus, z.shape)) ** 2
    return dens.mean(axis=1)


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(x, y, 1)[0])


def l2_check(evaluator: Evaluator, cfg: FieldConfig) -> QuadratureReport:
    """Exponent-based square integrability test.

    Near each solenoid the ring-averaged |psi|^2 on log-spaced radii in
    [1e-6, 1e-1] is fitted to a power law on the innermost rings; the disc
    integral converges iff that exponent exceeds -2.  At infinity
    log avg |psi|^2 is fitted as p log R + c0 + c1 / R^2 on R in
    {10, 20, 40, 80}; decay is declared iff p < -2.
    """
    integrals, exponents = [], []
    for c in cfg.centers:
        avg = _ring_average(evaluator, c, INNER_RADII, 64)
        logs = np.log(np.maximum(avg, 1e-300))
        exponents.append(_slope(np.log(INNER_RADII[:INNER_FIT_RINGS]), logs[:INNER_FIT_RINGS]))
        # 2 pi int avg(r) r dr, trapezoid in log r
        g = 2 * np.pi * avg * INNER_RADII**2
        integrals.append(float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(np.log(INNER_RADII)))))
    avg = _ring_average(evaluator, 0j, OUTER_RADII, 256)
    if np.all(avg == 0.0):
        outer = -math.inf
    else:
        A = np.column_stack([np.log(OUTER_RADII), np.ones(4), OUTER_RADII**-2.0])
        coef, *_ = np.linalg.lstsq(A, np.log(np.maximum(avg, 1e-300)), rcond=None)
        outer = float(coef[0])
    is_l2 = all(e > -2.0 for e in exponents) and all(math.isfinite(v) for v in integrals) and outer < -2.0
    return QuadratureReport(tuple(integrals), tuple(exponents), outer, is_l2)


# ---------------------------------------------------------------------------
# boundary functional oracle


@dataclass(frozen=True)
class FunctionalReport:
    alpha: float
    tau: float
    mu: complex
    extracted: dict[str, complex]
    expected: dict[str, complex]
    max_relative_deviation: float


def functional_oracle(alpha: float, tau: float, mu: complex = 1.0) -> FunctionalReport:
    """Extract boundary data from a Krein sample and compare with closed forms."""
    bd = extract_boundary_data(lambda z: krein_sample(alpha, tau, mu, z), Solenoid(0j, alpha))
    extracted = {
        "plus.c_minus_alpha": bd.plus.c_minus_alpha,
        "minus.c_minus_alpha": bd.minus.c_minus_alpha,
        "plus.c_alpha_minus_1": bd.plus.c_alpha_minus_1,
        "minus.c_alpha_minus_1": bd.minus.c_alpha_minus_1,
    }
    expected = krein_boundary_values(alpha, tau, mu)
    scale = max(abs(v) for v in expected.values())
    dev = max(abs(extracted[k] - expected[k]) for k in expected) / scale
    return FunctionalReport(alpha, tau, complex(mu), extracted, expected, float(dev))


# ---------------------------------------------------------------------------
# brute-force kernel dimension


def _count_below(x: float) -> int:
    # number of integers d >= 0 with d < x
    return max(0, math.ceil(x - 1e-9))


def brute_force_kernel_dimension(cfg: FieldConfig, tau: float) -> int:
    """Null-space dimension of the full zero-mode system, assembled directly.

    Unknowns: polynomial part P of f_+ (degree < -Phi - 1), residues eta_j,
    and coefficients of f_- in conj(z) (degree < Phi - 1).  Rows: vanishing
    residue moments of order k <= Phi, and at each solenoid the boundary
    relation sigma(a)(1 - e^{i tau}) E_j eta_j = sigma(1 - a)(1 + e^{i tau}) f_-(z_j) / E_j.
    """
    phi = total_flux(cfg)
    n = cfg.n
    n_p = _count_below(-phi - 1.0)
    n_q = _count_below(phi - 1.0)
    k_rows = math.floor(phi + 1e-9) + 1 if phi > -1e-9 else 0
    e = unit_phase(tau)
    scales = solenoid_scales(cfg) if n else np.zeros(0)
    size = n_p + n + n_q
    rows = []
    for k in range(k_rows):
        r = np.zeros(size, dtype=complex)
        r[n_p : n_p + n] = cfg.centers**k
        rows.append(r)
    for j in range(n):
        a = cfg.alphas[j]
        r = np.zeros(size, dtype=complex)
        r[n_p + j] = specfun.sigma(a) * (1 - e) * scales[j]
        r[n_p + n :] = -specfun.sigma(1 - a) * (1 + e) / scales[j] * np.conj(cfg.centers[j]) ** np.arange(n_q)
        rows.append(r)
    if size == 0:
        return 0
    if not rows:
        return size
    mat = np.array(rows)
    norms = np.linalg.norm(mat, axis=1)
    mat = mat[norms > 0] / norms[norms > 0, None]
    if mat.shape[0] == 0:
        return size
    basis, _ = null_space(mat, 1e-9)
    return basis.shape[1]


def gram_condition(modes: list[ModeDescriptor], cfg: FieldConfig, points: np.ndarray) -> float:
    """Condition number of the Gram matrix of sampled mode values."""
    if not modes:
        return 1.0
    cols = []
    for d in modes:
        s = evaluate_descriptor(d, cfg, points)
        v = np.concatenate([s.plus, s.minus])
        cols.append(v / np.linalg.norm(v))
    m = np.column_stack(cols)
    return float(np.linalg.cond(m.conj().T @ m))
