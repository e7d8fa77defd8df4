"""Magnetic field model: smooth radial bumps plus Aharonov-Bohm solenoids.

The field is ``B = B0 + sum_j 2 pi alpha_j delta_{z_j}`` where ``B0`` is a
finite sum of bumps with the fixed profile ``g(s) = exp(-1/(1 - s^2))``.
The scalar potential ``h`` solves ``Laplace h = B`` and splits as
``h0 + sum_j alpha_j log|z - z_j|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .errors import ConfigError, SingularPointError

ALPHA_MARGIN = 1e-6
MIN_SEPARATION = 1e-9
SINGULAR_RADIUS = 1e-12

_EXP1_AT_1 = float(special.exp1(1.0))
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _tail_integral(a):
    # int_a^1 exp(-1/v) dv, closed form through E1
    a = np.asarray(a, dtype=float)
    out = np.full(a.shape, math.exp(-1.0) - _EXP1_AT_1)
    pos = a > 0.0
    ap = a[pos]
    out[pos] = math.exp(-1.0) - ap * np.exp(-1.0 / ap) - _EXP1_AT_1 + special.exp1(1.0 / ap)
    return out


def profile_moment(t):
    """``int_0^t s g(s) ds`` for the bump profile, ``t`` clipped to [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return 0.5 * _tail_integral(1.0 - t * t)


PROFILE_MOMENT_TOTAL = float(profile_moment(1.0))


def _interior_integrand(t: float) -> float:
    return float(profile_moment(t)) / t if t > 0.0 else 0.0


def _interior_log_quad(s: float) -> float:
    # int_s^1 M(t)/t dt, with M the profile moment
    val, _ = integrate.quad(_interior_integrand, s, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def _interior_log_gl(s: np.ndarray) -> np.ndarray:
    a = s[:, None]
    t = 0.5 * (1.0 - a) * _GL_NODES[None, :] + 0.5 * (1.0 + a)
    return 0.5 * (1.0 - s) * ((profile_moment(t) / t) @ _GL_WEIGHTS)


@dataclass(frozen=True)
class Solenoid:
    center: complex
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "alpha", float(self.alpha))
        if not ALPHA_MARGIN <= self.alpha <= 1.0 - ALPHA_MARGIN:
            raise ConfigError(
                f"solenoid intensity must lie in [{ALPHA_MARGIN}, {1 - ALPHA_MARGIN}], got {self.alpha}"
            )


@dataclass(frozen=True)
class RadialBump:
    """Smooth compactly supported bump; ``flux`` is its total flux over 2 pi."""

    center: complex
    radius: float
    flux: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "flux", float(self.flux))
        if not self.radius > 0.0:
            raise ConfigError(f"bump radius must be positive, got {self.radius}")

    @property
    def amplitude(self) -> float:
        return self.flux / (self.radius**2 * PROFILE_MOMENT_TOTAL)

    def field_strength(self, z):
        s = np.abs(np.asarray(z, dtype=complex) - self.center) / self.radius
        inside = s < 1.0
        out = np.zeros(s.shape)
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - s[inside] ** 2))
        return out

    def enclosed_flux(self, r):
        """Flux (over 2 pi) inside the disc of radius ``r`` about the center."""
        return self.flux * profile_moment(np.asarray(r, dtype=float) / self.radius) / PROFILE_MOMENT_TOTAL

    def potential(self, z: complex) -> float:
        """h0 contribution at one point, interior part by adaptive quadrature."""
        r = abs(complex(z) - self.center)
        if r >= self.radius:
            return self.flux * math.log(r)
        tail = _interior_log_quad(r / self.radius)
        return self.flux * (math.log(self.radius) - tail / PROFILE_MOMENT_TOTAL)

    def potential_array(self, z) -> np.ndarray:
        """Vectorized h0 contribution; interior by 48-point Gauss-Legendre."""
        r = np.abs(np.asarray(z, dtype=complex) - self.center)
        out = np.empty(r.shape)
        outside = r >= self.radius
        with np.errstate(divide="ignore"):
            out[outside] = self.flux * np.log(r[outside])
        if not np.all(outside):
            s = (r[~outside] / self.radius).ravel()
            tail = _interior_log_gl(s).reshape(r[~outside].shape)
            out[~outside] = self.flux * (math.log(self.radius) - tail / PROFILE_MOMENT_TOTAL)
        return out


@dataclass(frozen=True)
class PotentialValue:
    total: float
    regular: float
    singular_parts: tuple[float, ...]


@dataclass(frozen=True)
class FieldConfig:
    bumps: tuple[RadialBump, ...] = ()
    solenoids: tuple[Solenoid, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "bumps", tuple(self.bumps))
        object.__setattr__(self, "solenoids", tuple(self.solenoids))
        centers = [s.center for s in self.solenoids]
        for i in range(len(centers)):
            for k in range(i + 1, len(centers)):
                if abs(centers[i] - centers[k]) < MIN_SEPARATION:
                    raise ConfigError(f"solenoids {i} and {k} closer than {MIN_SEPARATION}")

    @property
    def n(self) -> int:
        return len(self.solenoids)

    @cached_property
    def centers(self) -> np.ndarray:
        return np.array([s.center for s in self.solenoids], dtype=complex)

    @cached_property
    def alphas(self) -> np.ndarray:
        return np.array([s.alpha for s in self.solenoids], dtype=float)


def total_flux(cfg: FieldConfig) -> float:
    """Total flux over 2 pi: bump fluxes plus solenoid intensities."""
    return float(sum(b.flux for b in cfg.bumps) + sum(s.alpha for s in cfg.solenoids))


def field_strength(cfg: FieldConfig, z) -> np.ndarray:
    """Regular part B0 at ``z`` (array friendly)."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape)
    for b in cfg.bumps:
        out += b.field_strength(z)
    return out


def _check_regular_point(cfg: FieldConfig, z) -> None:
    if cfg.n and np.any(np.abs(np.asarray(z, dtype=complex)[..., None] - cfg.centers) < SINGULAR_RADIUS):
        raise SingularPointError("point coincides with a solenoid")


def scalar_potential(cfg: FieldConfig, z: complex) -> PotentialValue:
    z = complex(z)
    _check_regular_point(cfg, z)
    regular = math.fsum(b.potential(z) for b in cfg.bumps)
    singular = tuple(s.alpha * math.log(abs(z - s.center)) for s in cfg.solenoids)
    return PotentialValue(total=regular + math.fsum(singular), regular=regular, singular_parts=singular)


def potential(cfg: FieldConfig, z) -> np.ndarray:
    """Total scalar potential h on an array of points."""
    z = np.asarray(z, dtype=complex)
    _check_regular_point(cfg, z)
    out = np.zeros(z.shape)
    for b in cfg.bumps:
        out += b.potential_array(z)
    for s in cfg.solenoids:
        out += s.alpha * np.log(np.abs(z - s.center))
    return out


def regular_part_at_solenoid(cfg: FieldConfig, j: int) -> tuple[float, float]:
    """(h0(z_j), sum_{l != j} alpha_l log|z_j - z_l|)."""
    zj = cfg.solenoids[j].center
    h0 = math.fsum(b.potential(zj) for b in cfg.bumps)
    others = math.fsum(
        s.alpha * math.log(abs(zj - s.center)) for l, s in enumerate(cfg.solenoids) if l != j
    )
    return h0, others


def asymptotic_exponents(cfg: FieldConfig) -> tuple[float, list[float]]:
    """Growth exponents of e^h at infinity and at each solenoid."""
    return total_flux(cfg), [s.alpha for s in cfg.solenoids]


def make_config(
    solenoids: Sequence[tuple[complex, float]] = (),
    bumps: Sequence[tuple[complex, float, float]] = (),
) -> FieldConfig:
    """Shorthand: ``solenoids=[(z, alpha)]``, ``bumps=[(w, radius, flux)]``."""
    return FieldConfig(
        bumps=tuple(RadialBump(c, r, f) for c, r, f in bumps),
        solenoids=tuple(Solenoid(c, a) for c, a in solenoids),
    )
