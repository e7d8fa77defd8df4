"""Run configuration: TOML file, schema validation, conversion to domain objects."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ConfigError
from .extension import ExtensionSpec, parse_angle
from .field import FieldConfig, RadialBump, Solenoid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_ANGLE = {
    "oneOf": [
        {"type": "number", "minimum": 0},
        {"type": "string", "pattern": r"^pi:\s*[0-9./]+\s*$"},
    ]
}
_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["field"],
    "properties": {
        "field": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "solenoids": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["center", "alpha"],
                        "properties": {
                            "center": _POINT,
                            "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                        },
                    },
                },
                "bumps": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["center", "radius", "flux"],
                        "properties": {
                            "center": _POINT,
                            "radius": {"type": "number", "exclusiveMinimum": 0},
                            "flux": {"type": "number"},
                        },
                    },
                },
            },
        },
        "extension": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tau": _ANGLE,
                "taus": {"type": "array", "items": _ANGLE},
                "tau_prime": {"oneOf": [_ANGLE, {"type": "array", "items": _ANGLE}]},
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "probe_alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "mode": {"type": "integer", "minimum": 0},
                "grid": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "xmin": {"type": "number"},
                        "xmax": {"type": "number"},
                        "ymin": {"type": "number"},
                        "ymax": {"type": "number"},
                        "nx": {"type": "integer", "minimum": 1},
                        "ny": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
    },
}


@dataclass(frozen=True)
class GridSpec:
    xmin: float = -3.0
    xmax: float = 3.0
    ymin: float = -3.0
    ymax: float = 3.0
    nx: int = 64
    ny: int = 64


@dataclass(frozen=True)
class RunConfig:
    field: FieldConfig
    taus: ExtensionSpec | None = None
    tau: float | None = None
    tau_prime: ExtensionSpec | None = None
    seed: int = 0
    tolerance: float = 1e-6
    probe_alpha: float = 0.3
    mode: int = 0
    grid: GridSpec = field(default_factory=GridSpec)

    def uniform_tau(self) -> float:
        if self.taus is None:
            raise ConfigError("this command needs [extension] tau or taus")
        if len(self.taus) == 0:
            if self.tau is None:
                raise ConfigError("no solenoids: give a scalar extension.tau")
            return self.tau
        if not self.taus.is_uniform():
            raise ConfigError("zero-mode counting needs the same tau at every solenoid")
        return self.taus.taus[0]


def _validate(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]
        raise ConfigError("config schema violation: " + "; ".join(msgs))


def _as_spec(value, n: int) -> ExtensionSpec:
    if isinstance(value, list):
        return ExtensionSpec.parse(value)
    return ExtensionSpec.uniform(value, n)


def parse_config(raw: dict) -> RunConfig:
    _validate(raw)
    f = raw["field"]
    cfg = FieldConfig(
        bumps=tuple(RadialBump(complex(*b["center"]), b["radius"], b["flux"]) for b in f.get("bumps", [])),
        solenoids=tuple(Solenoid(complex(*s["center"]), s["alpha"]) for s in f.get("solenoids", [])),
    )
    ext = raw.get("extension", {})
    if "tau" in ext and "taus" in ext:
        raise ConfigError("give either extension.tau or extension.taus, not both")
    taus = None
    tau = parse_angle(ext["tau"])[0] if "tau" in ext else None
    if "taus" in ext:
        taus = ExtensionSpec.parse(ext["taus"])
        if len(taus) != cfg.n:
            raise ConfigError(f"extension.taus has {len(taus)} entries for {cfg.n} solenoids")
    elif "tau" in ext:
        taus = ExtensionSpec.uniform(ext["tau"], cfg.n)
    tau_prime = _as_spec(ext["tau_prime"], cfg.n) if "tau_prime" in ext else None
    run = raw.get("run", {})
    return RunConfig(
        field=cfg,
        taus=taus,
        tau=tau,
        tau_prime=tau_prime,
        seed=run.get("seed", 0),
        tolerance=float(run.get("tolerance", 1e-6)),
        probe_alpha=float(run.get("probe_alpha", 0.3)),
        mode=run.get("mode", 0),
        grid=GridSpec(**run.get("grid", {})),
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from exc
    return parse_config(raw)
