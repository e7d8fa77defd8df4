"""Command-line interface: zeromodes, classify, spinflip, grid.

Exit codes: 0 ok, 2 configuration error, 3 verification failure, 4 empty result.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import kernelsolver, verify
from .config import RunConfig, load_config
from .errors import ConditioningWarning, ConfigError
from .extension import (
    ExtensionSpec,
    Table1Label,
    classify_extension,
    ev_tau,
    pattern_is_square,
    spin_flip_boundary_check,
    v_equivalent,
    w_equivalent,
)
from .kernelsolver import evaluate_descriptor

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_EMPTY = 4

SCHEMA_VERSION = 1
MOMENT_TOL = 1e-10
GRID_SKIP_RADIUS = 1e-6

REPORT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema_version", "command"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["zeromodes", "classify", "spinflip"]},
    },
    "allOf": [
        {
            "if": {"properties": {"command": {"const": "zeromodes"}}},
            "then": {
                "required": ["flux", "n", "tau", "counts", "flags", "modes", "certificate", "verification"],
                "properties": {
                    "counts": {
                        "type": "object",
                        "required": ["constructed", "plus_residue", "plus_polynomial", "minus", "dirac_formula", "pauli_formula"],
                    },
                    "verification": {"type": "object", "required": ["passed", "l2", "brute_force_dimension"]},
                },
            },
        },
        {
            "if": {"properties": {"command": {"const": "classify"}}},
            "then": {"required": ["solenoids", "ev_is_square", "max_is_square", "notes"]},
        },
        {
            "if": {"properties": {"command": {"const": "spinflip"}}},
            "then": {"required": ["v_equivalent", "w_equivalent", "verdict", "probe"]},
        },
    ],
}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def render_report(report: dict) -> str:
    data = _jsonable({"schema_version": SCHEMA_VERSION, **report})
    jsonschema.validate(data, REPORT_SCHEMA)
    return json.dumps(data, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# commands


def cmd_zeromodes(rc: RunConfig) -> tuple[dict, int]:
    cfg = rc.field
    tau = rc.uniform_tau()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConditioningWarning)
        basis = kernelsolver.pauli_kernel(cfg, tau)
    notes = [str(w.message) for w in caught]
    if basis.flags["integer_flux"]:
        notes.append("total flux is an integer: counts are discontinuous here")

    l2 = []
    for i, desc in enumerate(basis.modes):
        rep = verify.l2_check(lambda z, d=desc: evaluate_descriptor(d, cfg, z), cfg)
        l2.append({"mode": i, "is_l2": rep.is_l2, "outer_exponent": rep.outer_exponent, "inner_exponents": list(rep.inner_exponents)})
    annihilation = None
    if basis.count:
        res = verify.annihilation_residual(basis, cfg)
        annihilation = {
            "max_relative_residual": res.max_relative_residual,
            "points_tested": res.points_tested,
            "worst_point": res.worst_point,
        }
    rows = kernelsolver.moment_rank(cfg) if kernelsolver.is_zero_angle(tau) else 0
    moment = max((kernelsolver.moment_residual(d, cfg, rows) for d in basis.plus_modes), default=0.0)
    brute = verify.brute_force_kernel_dimension(cfg, tau)
    cert = basis.certificate
    passed = (
        (annihilation is None or annihilation["max_relative_residual"] < rc.tolerance)
        and all(e["is_l2"] for e in l2)
        and moment < MOMENT_TOL
        and brute == basis.count
        and (cert is None or cert.dimension == 0)
    )
    c = basis.components
    report = {
        "command": "zeromodes",
        "flux": basis.flux,
        "n": basis.n,
        "tau": basis.tau,
        "counts": {
            "constructed": basis.count,
            "plus_residue": c.plus_residue,
            "plus_polynomial": c.plus_polynomial,
            "minus": c.minus,
            "dirac_formula": basis.dirac_formula,
            "pauli_formula": basis.pauli_formula,
        },
        "flags": basis.flags,
        "modes": kernelsolver.describe(basis),
        "certificate": None
        if cert is None
        else {
            "smallest_singular_value": cert.smallest_singular_value,
            "largest_singular_value": cert.largest_singular_value,
            "dimension": cert.dimension,
            "m": cert.m,
        },
        "verification": {
            "annihilation": annihilation,
            "l2": l2,
            "moment_residual": moment,
            "brute_force_dimension": brute,
            "tolerance": rc.tolerance,
            "passed": passed,
        },
        "notes": notes,
    }
    return report, EXIT_OK if passed else EXIT_VERIFY


NORMALIZATION_NOTE = (
    "Intensities are taken in (0, 1). Shifting an intensity by an integer is a gauge change "
    "that relabels which tau reproduces the EV conditions; that renormalization is not applied here."
)


def cmd_classify(rc: RunConfig) -> tuple[dict, int]:
    if rc.taus is None:
        raise ConfigError("classify needs [extension] tau or taus")
    alphas = [float(a) for a in rc.field.alphas]
    result = classify_extension(alphas, rc.taus)
    rng = np.random.default_rng(rc.seed)
    entries, consistent = [], True
    for j, (a, t, lab) in enumerate(zip(alphas, rc.taus.taus, result.labels)):
        ev_pred = pattern_is_square("EV", a, t, rng)
        max_pred = pattern_is_square("MAX", a, t, rng)
        ok = ev_pred == (lab is Table1Label.EV_MATCH) and not max_pred
        consistent &= ok
        entries.append(
            {
                "index": j,
                "alpha": a,
                "tau": t,
                "label": lab.value,
                "ev_tau": ev_tau(a),
                "predicate_consistent": ok,
            }
        )
    verdict = (
        "EV is the square of this Dirac extension"
        if result.ev_is_square
        else "EV is not the square of this Dirac extension"
    )
    report = {
        "command": "classify",
        "solenoids": entries,
        "ev_is_square": result.ev_is_square,
        "max_is_square": result.max_is_square,
        "max_label": result.max_label.value,
        "verdict": verdict,
        "notes": [NORMALIZATION_NOTE, "The Maximal Pauli operator is not the square of any Dirac extension."],
    }
    return report, EXIT_OK if consistent else EXIT_VERIFY


def cmd_spinflip(rc: RunConfig) -> tuple[dict, int]:
    if rc.taus is None or rc.tau_prime is None:
        raise ConfigError("spinflip needs extension.tau (or taus) and extension.tau_prime")
    if len(rc.taus) != len(rc.tau_prime):
        raise ConfigError(f"tau has {len(rc.taus)} entries but tau_prime has {len(rc.tau_prime)}")
    v = v_equivalent(rc.tau_prime, rc.taus)
    w = w_equivalent(rc.tau_prime, rc.taus)
    probe, consistent = [], True
    for tp, qp, t, q in zip(rc.tau_prime.taus, rc.tau_prime.pi_multiples, rc.taus.taus, rc.taus.pi_multiples):
        one_p, one = ExtensionSpec((tp,), (qp,)), ExtensionSpec((t,), (q,))
        vc = spin_flip_boundary_check(rc.probe_alpha, tp, t, "V")
        wc = spin_flip_boundary_check(rc.probe_alpha, tp, t, "W")
        agree = vc.ok == v_equivalent(one_p, one) and wc.ok == w_equivalent(one_p, one)
        consistent &= agree
        probe.append(
            {
                "tau": t,
                "tau_prime": tp,
                "alpha": rc.probe_alpha,
                "v_check": {"ok": vc.ok, "residual": vc.residual},
                "w_check": {"ok": wc.ok, "residual": wc.residual},
                "agrees_with_predicate": agree,
            }
        )
    if v and w:
        verdict = "equivalent under V and under W"
    elif v:
        verdict = "equivalent under V"
    elif w:
        verdict = "equivalent under W"
    else:
        verdict = "not equivalent under V or W"
    report = {"command": "spinflip", "v_equivalent": v, "w_equivalent": w, "verdict": verdict, "probe": probe}
    return report, EXIT_OK if consistent else EXIT_VERIFY


def grid_rows(rc: RunConfig) -> tuple[list[tuple[float, float, float, float]], int, int]:
    """(rows, skipped, mode count) for the configured mode over the grid."""
    cfg = rc.field
    basis = kernelsolver.dirac_kernel(cfg, rc.uniform_tau())
    if basis.count == 0:
        return [], 0, 0
    if rc.mode >= basis.count:
        raise ConfigError(f"run.mode = {rc.mode} but only {basis.count} modes exist")
    g = rc.grid
    xs = np.linspace(g.xmin, g.xmax, g.nx)
    ys = np.linspace(g.ymin, g.ymax, g.ny)
    z = (xs[None, :] + 1j * ys[:, None]).ravel()
    keep = np.ones(z.shape, dtype=bool)
    for c in cfg.centers:
        keep &= np.abs(z - c) >= GRID_SKIP_RADIUS
    s = evaluate_descriptor(basis.modes[rc.mode], cfg, z[keep])
    rows = list(zip(z[keep].real, z[keep].imag, np.abs(s.plus) ** 2, np.abs(s.minus) ** 2))
    return rows, int((~keep).sum()), basis.count


# ---------------------------------------------------------------------------
# entry point


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solenoid-modes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("zeromodes", "construct and verify the zero-mode basis"),
        ("classify", "compare the extension with the EV and Maximal Pauli operators"),
        ("spinflip", "spin-flip equivalence of two tau vectors"),
        ("grid", "CSV of |psi_+|^2, |psi_-|^2 for one mode on a grid"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="TOML configuration file")
        p.add_argument("-o", "--output", help="write to this file instead of stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = load_config(args.config)
        if args.command == "grid":
            rows, skipped, count = grid_rows(rc)
            if count == 0:
                print("no zero modes for this configuration", file=sys.stderr)
                return EXIT_EMPTY
            out = open(args.output, "w", newline="") if args.output else sys.stdout
            try:
                writer = csv.writer(out, lineterminator="\n")
                writer.writerow(["x", "y", "abs_psi_plus_sq", "abs_psi_minus_sq"])
                writer.writerows((repr(float(a)) for a in r) for r in rows)
            finally:
                if args.output:
                    out.close()
            print(f"{len(rows)} rows written, {skipped} skipped near solenoids", file=sys.stderr)
            return EXIT_OK
        handler = {"zeromodes": cmd_zeromodes, "classify": cmd_classify, "spinflip": cmd_spinflip}[args.command]
        report, code = handler(rc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for note in report.get("notes", []) if args.command == "zeromodes" else []:
        print(f"note: {note}", file=sys.stderr)
    _emit(render_report(report), args.output)
    if code == EXIT_VERIFY:
        print("verification failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
