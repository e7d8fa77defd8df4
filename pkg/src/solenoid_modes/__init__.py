"""Zero modes of Dirac and Pauli operators with Aharonov-Bohm solenoids."""

from .errors import (
    ConditioningWarning,
    ConfigError,
    DegenerateSystemError,
    DomainError,
    ExtractionError,
    PoleError,
    SingularPointError,
    StepError,
)
from .extension import ExtensionSpec, SpinorSample
from .field import FieldConfig, RadialBump, Solenoid, make_config, total_flux
from .kernelsolver import ZeroModeBasis, dirac_kernel, pauli_kernel

__all__ = [
    "ConditioningWarning",
    "ConfigError",
    "DegenerateSystemError",
    "DomainError",
    "ExtractionError",
    "PoleError",
    "SingularPointError",
    "StepError",
    "ExtensionSpec",
    "SpinorSample",
    "FieldConfig",
    "RadialBump",
    "Solenoid",
    "make_config",
    "total_flux",
    "ZeroModeBasis",
    "dirac_kernel",
    "pauli_kernel",
]
