"""Zero-mode bases for the Dirac extension D^h and its square.

A zero mode has ``psi_+ = e^h f_+`` with ``f_+`` holomorphic off the
solenoids (at most simple poles there) and ``psi_- = e^{-h} f_-`` with
``f_-`` a polynomial in conj(z).  Square integrability at infinity bounds the
degrees, the extension parameter decides which boundary coefficients may be
nonzero, and what remains is linear algebra on residues and coefficients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import specfun
from .errors import ConditioningWarning, DegenerateSystemError, SingularPointError
from .extension import ExtensionSpec, SpinorSample, is_pi_angle, is_zero_angle
from .field import SINGULAR_RADIUS, FieldConfig, potential, regular_part_at_solenoid, total_flux

INTEGER_TOL = 1e-9
NULL_REL_TOL = 1e-10
CONDITIONING_RATIO = 1e-10


def lower_int(x: float) -> int:
    """{x}: floor for non-integer x > 1, x - 1 for integer x > 1, else 0."""
    k = round(x)
    if abs(x - k) <= INTEGER_TOL:
        return int(k) - 1 if k > 1 else 0
    return int(math.floor(x)) if x > 1 else 0


def is_integer_flux(phi: float) -> bool:
    return abs(phi - round(phi)) <= INTEGER_TOL


def solenoid_scales(cfg: FieldConfig) -> np.ndarray:
    """E_j = exp(h0(z_j) + sum_{l != j} alpha_l log|z_j - z_l|): e^h ~ E_j r_j^alpha_j."""
    return np.array([math.exp(sum(regular_part_at_solenoid(cfg, j))) for j in range(cfg.n)])


def b_weights(cfg: FieldConfig) -> np.ndarray:
    if cfg.n < 1:
        raise DegenerateSystemError("b-weights need at least one solenoid")
    scales = solenoid_scales(cfg)
    ratios = np.array([specfun.sigma(1.0 - a) / specfun.sigma(a) for a in cfg.alphas])
    return ratios / scales**2


def moment_matrix(centers: np.ndarray, rows: int) -> np.ndarray:
    """Rows (z_1^k, ..., z_n^k) for k = 0..rows-1."""
    k = np.arange(max(rows, 0))[:, None]
    return np.asarray(centers, dtype=complex)[None, :] ** k


def moment_rank(cfg: FieldConfig) -> int:
    """n - {n - Phi}: the number of vanishing residue moments (never negative)."""
    return max(0, cfg.n - lower_int(cfg.n - total_flux(cfg)))


@dataclass(frozen=True)
class MomentSystem:
    m: int
    vand: np.ndarray
    weights: np.ndarray

    def sqrt_b_vstar(self) -> np.ndarray:
        """sqrt(B) V*, shape n x (m + 1)."""
        return np.sqrt(self.weights)[:, None] * self.vand.conj().T


def moment_system(cfg: FieldConfig) -> MomentSystem:
    if cfg.n < 1:
        raise DegenerateSystemError("moment system needs at least one solenoid")
    m = cfg.n - lower_int(cfg.n - total_flux(cfg)) - 1
    if m < 0:
        raise DegenerateSystemError(f"m = {m} < 0: no moment constraints")
    return MomentSystem(m=m, vand=moment_matrix(cfg.centers, m + 1), weights=b_weights(cfg))


def null_space(matrix, rel_tol: float = NULL_REL_TOL) -> tuple[np.ndarray, float]:
    """Right null space by SVD with threshold rel_tol * sigma_max.

    Returns (basis as columns, smallest singular value), where the singular
    values are padded with zeros when the matrix has more columns than rows.
    Each basis vector is scaled so its first non-negligible entry is real
    positive.
    """
    a = np.asarray(matrix, dtype=complex)
    ncols = a.shape[1]
    if a.shape[0] == 0 or ncols == 0:
        return np.eye(ncols, dtype=complex), 0.0
    _, s, vh = np.linalg.svd(a)
    full = np.zeros(ncols)
    full[: len(s)] = s
    smax = full.max()
    keep = full < rel_tol * smax if smax > 0 else np.ones(ncols, dtype=bool)
    basis = vh.conj().T[:, keep]
    for i in range(basis.shape[1]):
        v = basis[:, i]
        lead = np.flatnonzero(np.abs(v) > 1e-8 * np.abs(v).max())[0]
        basis[:, i] = v * (abs(v[lead]) / v[lead])
    return basis, float(full.min())


# ---------------------------------------------------------------------------
# mode descriptors


class Operator(str, Enum):
    DIRAC = "DIRAC"
    PAULI = "PAULI"


@dataclass(frozen=True)
class RationalDescriptor:
    """psi_+ = e^h (sum_j residues_j / (z - z_j) + sum_k poly_k z^k), psi_- = 0."""

    residues: np.ndarray
    poly: np.ndarray

    def to_json(self) -> dict:
        return {"residues": list(map(complex, self.residues)), "poly": list(map(complex, self.poly))}


@dataclass(frozen=True)
class AntiPolyDescriptor:
    """psi_+ = 0, psi_- = e^{-h} sum_k coefficients_k conj(z)^k."""

    coefficients: np.ndarray

    def to_json(self) -> dict:
        return {"coefficients": list(map(complex, self.coefficients))}


ModeDescriptor = RationalDescriptor | AntiPolyDescriptor


@dataclass(frozen=True)
class CoupledCertificate:
    smallest_singular_value: float
    largest_singular_value: float
    dimension: int
    m: int

    def __iter__(self):
        yield self.smallest_singular_value
        yield self.dimension


@dataclass(frozen=True)
class ComponentCounts:
    """Per-family mode counts from the case analysis."""

    plus_residue: int = 0
    plus_polynomial: int = 0
    minus_polynomial: int = 0

    @property
    def plus(self) -> int:
        return self.plus_residue + self.plus_polynomial

    @property
    def minus(self) -> int:
        return self.minus_polynomial

    @property
    def total(self) -> int:
        return self.plus + self.minus


@dataclass(frozen=True)
class ZeroModeBasis:
    which: Operator
    tau: float
    flux: float
    n: int
    plus_modes: tuple[RationalDescriptor, ...]
    minus_modes: tuple[AntiPolyDescriptor, ...]
    components: ComponentCounts
    dirac_formula: int
    pauli_formula: int
    certificate: CoupledCertificate | None = None
    flags: dict[str, bool] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.plus_modes) + len(self.minus_modes)

    @property
    def modes(self) -> tuple[ModeDescriptor, ...]:
        return self.plus_modes + self.minus_modes


def dirac_formula(n: int, phi: float, tau: float) -> int:
    """Headline count for D^h: {n - Phi}, {Phi}, or 0."""
    if is_zero_angle(tau):
        return lower_int(n - phi)
    if is_pi_angle(tau):
        return lower_int(phi)
    return 0


def pauli_formula(n: int, phi: float, tau: float) -> int:
    """Headline count for the square: {|n - Phi|}, {|Phi|}, or 0."""
    if is_zero_angle(tau):
        return lower_int(abs(n - phi))
    if is_pi_angle(tau):
        return lower_int(abs(phi))
    return 0


def _uniform_tau(tau) -> float:
    if isinstance(tau, ExtensionSpec):
        if not tau.is_uniform():
            raise ValueError("zero-mode counting needs the same tau at every solenoid")
        return tau.taus[0]
    return float(tau)


def _unit(k: int, size: int) -> np.ndarray:
    e = np.zeros(size, dtype=complex)
    e[k] = 1.0
    return e


def _product_poly(centers: np.ndarray) -> np.ndarray:
    """Ascending coefficients of prod_j (w - conj(z_j))."""
    coeffs = np.array([1.0 + 0j])
    for c in centers:
        coeffs = np.convolve(coeffs, np.array([-np.conj(c), 1.0]))
    return coeffs


def coupled_certificate(cfg: FieldConfig, tau: float) -> CoupledCertificate:
    """Smallest singular value of sqrt(B) V* and the certified null dimension."""
    tau = _uniform_tau(tau)
    if is_zero_angle(tau) or is_pi_angle(tau):
        raise ValueError("the coupled system only arises for tau outside {0, pi}")
    try:
        system = moment_system(cfg)
    except DegenerateSystemError:
        return CoupledCertificate(0.0, 0.0, 0, -1)
    s = np.linalg.svd(system.sqrt_b_vstar(), compute_uv=False)
    smax, smin = float(s.max()), float(s.min())
    if smin < CONDITIONING_RATIO * smax:
        warnings.warn(
            f"sqrt(B) V* is ill conditioned: sigma_min/sigma_max = {smin / smax:.3e}",
            ConditioningWarning,
            stacklevel=2,
        )
    dimension = int(np.sum(s < NULL_REL_TOL * smax))
    return CoupledCertificate(smin, smax, dimension, system.m)


def _family_sizes(cfg: FieldConfig, tau: float) -> tuple[int, int, int, bool]:
    # (plus polynomial modes, minus modes, moment rows, forced zeros in minus)
    phi = total_flux(cfg)
    n = cfg.n
    if is_pi_angle(tau):
        return lower_int(-phi), lower_int(phi), 0, False
    if is_zero_angle(tau):
        return lower_int(-phi), lower_int(phi - n), moment_rank(cfg), True
    return lower_int(-phi), lower_int(phi - n), 0, True


def _build(cfg: FieldConfig, tau, which: Operator) -> ZeroModeBasis:
    tau = _uniform_tau(tau)
    n = cfg.n
    phi = total_flux(cfg)
    n_poly, n_minus, rows, forced = _family_sizes(cfg, tau)

    residue_modes: list[RationalDescriptor] = []
    if is_zero_angle(tau) and n > 0:
        basis, _ = null_space(moment_matrix(cfg.centers, rows)) if rows else (np.eye(n, dtype=complex), 0.0)
        residue_modes = [RationalDescriptor(basis[:, i].copy(), np.zeros(0, dtype=complex)) for i in range(basis.shape[1])]
    poly_modes = [RationalDescriptor(np.zeros(n, dtype=complex), _unit(k, k + 1)) for k in range(n_poly)]

    prefix = _product_poly(cfg.centers) if forced else np.array([1.0 + 0j])
    minus_modes = [AntiPolyDescriptor(np.convolve(prefix, _unit(k, k + 1))) for k in range(n_minus)]

    certificate = None
    if not (is_zero_angle(tau) or is_pi_angle(tau)) and n > 0:
        certificate = coupled_certificate(cfg, tau)

    components = ComponentCounts(len(residue_modes), len(poly_modes), len(minus_modes))
    d_formula = dirac_formula(n, phi, tau)
    p_formula = pauli_formula(n, phi, tau)
    flags = {
        "formulas_disagree": d_formula != p_formula,
        "dirac_formula_mismatch": components.total != d_formula,
        "pauli_formula_mismatch": components.total != p_formula,
        "integer_flux": is_integer_flux(phi),
    }
    return ZeroModeBasis(
        which=which,
        tau=tau,
        flux=phi,
        n=n,
        plus_modes=tuple(residue_modes + poly_modes),
        minus_modes=tuple(minus_modes),
        components=components,
        dirac_formula=d_formula,
        pauli_formula=p_formula,
        certificate=certificate,
        flags=flags,
    )


def dirac_kernel(cfg: FieldConfig, tau) -> ZeroModeBasis:
    """Explicit basis of ker D^h for uniform tau."""
    return _build(cfg, tau, Operator.DIRAC)


def pauli_kernel(cfg: FieldConfig, tau) -> ZeroModeBasis:
    """Basis of the kernel of the square, which coincides with ker D^h."""
    return _build(cfg, tau, Operator.PAULI)


def overdegree_candidates(cfg: FieldConfig, tau) -> list[ModeDescriptor]:
    """Each family's next candidate beyond the admissible degree range.

    These solve the zero-mode equation and the boundary conditions but should
    fail square integrability at infinity.
    """
    tau = _uniform_tau(tau)
    n = cfg.n
    n_poly, n_minus, rows, forced = _family_sizes(cfg, tau)
    out: list[ModeDescriptor] = [RationalDescriptor(np.zeros(n, dtype=complex), _unit(n_poly, n_poly + 1))]
    prefix = _product_poly(cfg.centers) if forced else np.array([1.0 + 0j])
    out.append(AntiPolyDescriptor(np.convolve(prefix, _unit(n_minus, n_minus + 1))))
    if is_zero_angle(tau) and rows >= 1 and n > 0:
        wide, _ = null_space(moment_matrix(cfg.centers, rows - 1)) if rows > 1 else (np.eye(n, dtype=complex), 0.0)
        narrow, _ = null_space(moment_matrix(cfg.centers, rows))
        # component of the wider null space orthogonal to the admissible one
        resid = wide - narrow @ (narrow.conj().T @ wide)
        u, s, _ = np.linalg.svd(resid)
        out.append(RationalDescriptor(u[:, 0].copy(), np.zeros(0, dtype=complex)))
    return out


def _check_point(cfg: FieldConfig, z: np.ndarray) -> None:
    if cfg.n and np.any(np.abs(z[..., None] - cfg.centers) < SINGULAR_RADIUS):
        raise SingularPointError("mode evaluated on a solenoid")


def evaluate_descriptor(desc: ModeDescriptor, cfg: FieldConfig, z) -> SpinorSample:
    z = np.asarray(z, dtype=complex)
    _check_point(cfg, z)
    h = potential(cfg, z)
    zero = np.zeros(z.shape, dtype=complex)
    if isinstance(desc, RationalDescriptor):
        f = np.polynomial.polynomial.polyval(z, desc.poly) if len(desc.poly) else zero.copy()
        for eta, c in zip(desc.residues, cfg.centers):
            if eta != 0:
                f = f + eta / (z - c)
        return SpinorSample(np.exp(h) * f, zero)
    f = np.polynomial.polynomial.polyval(np.conj(z), desc.coefficients)
    return SpinorSample(zero, np.exp(-h) * f)


def evaluate_mode(basis: ZeroModeBasis, cfg: FieldConfig, index: int, z) -> SpinorSample:
    """Value of the index-th mode (plus modes first, then minus modes)."""
    modes = basis.modes
    if not 0 <= index < len(modes):
        raise IndexError(f"mode index {index} out of range for {len(modes)} modes")
    return evaluate_descriptor(modes[index], cfg, z)


def moment_residual(desc: RationalDescriptor, cfg: FieldConfig, rows: int) -> float:
    """max_k |sum_j eta_j z_j^k| / (sum_j |eta_j| |z_j|^k) over k < rows."""
    if rows == 0:
        return 0.0
    v = moment_matrix(cfg.centers, rows)
    num = np.abs(v @ desc.residues)
    den = np.abs(v) @ np.abs(desc.residues)
    return float(np.max(num / np.where(den > 0, den, 1.0)))


def describe(basis: ZeroModeBasis) -> list[dict]:
    out = []
    for d in basis.plus_modes:
        out.append({"component": "plus", **d.to_json()})
    for d in basis.minus_modes:
        out.append({"component": "minus", **d.to_json()})
    return out


def formulas(n: int, phi: float, taus: Sequence[float]) -> list[tuple[float, int, int]]:
    return [(t, dirac_formula(n, phi, t), pauli_formula(n, phi, t)) for t in taus]
