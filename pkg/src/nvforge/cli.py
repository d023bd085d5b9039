"""``nvforge <subcommand> --config <path> --out <dir> [--seed N]``.

Every subcommand validates its JSON config (unknown keys are rejected), writes
its artifacts into ``--out`` and finishes with ``metadata.json`` describing the
run. Invalid configs exit with status 2 and a message on standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import error_budget, gates, grape, strain, tomography, zeeman
from .linalg import equal_up_to_global_phase, global_phase, is_unitary
from .output import matrix_rows, write_csv, write_json

SCHEMA_VERSION = 1

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}


def _schema(properties, required=()):
    return {
        "type": "object",
        "properties": {"schema_version": {"const": SCHEMA_VERSION}, **properties},
        "required": ["schema_version", *required],
        "additionalProperties": False,
    }


SCHEMAS = {
    "zeeman-scan": _schema(
        {
            "b_min_gauss": _NONNEG,
            "b_max_gauss": _NONNEG,
            "step_gauss": _POS,
            "guard_mhz": _POS,
            "D_mhz": _POS,
            "gyromagnetic_mhz_per_gauss": _POS,
            "linewidth_mhz": _POS,
        }
    ),
    "strain-scan": _schema(
        {
            "strain_min": _NONNEG,
            "strain_max": _NONNEG,
            "n_points": {"type": "integer", "minimum": 1},
            "poisson": _POS,
            "linewidth_mhz": _POS,
            "couplings": {
                "type": "object",
                "properties": {k: _NUM for k in ("lambda_A1", "lambda_A1p", "lambda_E", "lambda_Ep", "df_E1", "df_E2", "f_zpl")},
                "additionalProperties": False,
            },
            "geometry": {
                "type": "object",
                "properties": {
                    "length_um": _POS,
                    "width_um": _POS,
                    "height_um": _POS,
                    "youngs_modulus_gpa": _POS,
                    "peak_strain": _POS,
                    "n_z": {"type": "integer", "minimum": 2},
                    "n_x": {"type": "integer", "minimum": 2},
                },
                "additionalProperties": False,
            },
        }
    ),
    "gates": _schema(
        {
            "nu_dip_khz": _POS,
            "rabi_mhz": _POS,
            "constructions": {"type": "array", "items": {"enum": []}, "uniqueItems": True},
        }
    ),
    "error-budget": _schema(
        {
            "t_us": _NONNEG,
            "T1_ms": _POS,
            "T2_ms": _POS,
            "delta1_khz": _POS,
            "omega_mw_khz": _POS,
            "omega_opt_mhz": _POS,
            "delta_mag_mhz": _POS,
            "delta_str_mhz": _POS,
            "nu_dip_khz": _POS,
            "omega_mw_sweep_khz": {"type": "array", "items": _POS},
        }
    ),
    "grape": _schema(
        {
            "n_qubits": {"type": "integer", "minimum": 1, "maximum": 4, "default": 2},
            "couplings_khz": {
                "oneOf": [
                    _NONNEG,
                    {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {
                                "pair": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
                                "nu_khz": _NONNEG,
                            },
                            "required": ["pair", "nu_khz"],
                            "additionalProperties": False,
                        },
                    },
                ]
            },
            "n_slices": {"type": "integer", "minimum": 1},
            "slice_us": _POS,
            "target": {
                "oneOf": [
                    {"enum": ["cnot", "cz", "toffoli", "identity"]},
                    {
                        "type": "object",
                        "properties": {
                            "matrix": {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}}}
                        },
                        "required": ["matrix"],
                        "additionalProperties": False,
                    },
                ]
            },
            "amplitude_bound_mhz": _POS,
            "seed": {"type": "integer", "minimum": 0},
            "max_iters": {"type": "integer", "minimum": 0},
            "target_fidelity": {"type": "number", "minimum": 0, "maximum": 1},
            "step_rule": {"enum": ["armijo", "fixed"]},
            "step": _POS,
            "init_scale_mhz": _NONNEG,
            "zz_factor": _POS,
        },
    ),
}

GATE_BUILDERS = {
    "hadamard": (lambda: gates.hadamard_sequence(), gates.hadamard_matrix),
    "cz": (lambda: gates.cz_sequence(), gates.cz_matrix),
    "cnot_from_cz": (lambda: gates.cnot_from_cz(), gates.cnot_matrix),
    "cnot_from_sqrtswap": (lambda: gates.cnot_from_sqrtswap(), gates.cnot_matrix),
    "swap": (lambda: gates.swap_sequence(), lambda: gates.flipflop_evolution(100.0, 20.0)),
    "sqrt_swap": (lambda: gates.sqrtswap_sequence(), lambda: gates.flipflop_evolution(100.0, 10.0)),
    "toffoli": (lambda: gates.toffoli_sequence(), gates.toffoli_matrix),
}
SCHEMAS["gates"]["properties"]["constructions"]["items"]["enum"] = list(GATE_BUILDERS)


class ConfigError(ValueError):
    pass


def load_config(command, path):
    data = {"schema_version": SCHEMA_VERSION}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(data, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid {command} config at {where}: {exc.message}") from exc
    return data


# ------------------------------------------------------------------ subcommands


def cmd_zeeman_scan(cfg, out, seed):
    b_lo = cfg.get("b_min_gauss", 0.0)
    b_hi = cfg.get("b_max_gauss", 1000.0)
    if b_hi <= b_lo:
        raise ConfigError(f"b_max_gauss ({b_hi}) must exceed b_min_gauss ({b_lo})")
    step = cfg.get("step_gauss", 1.0)
    guard = cfg.get("guard_mhz", 10.0)
    linewidth = cfg.get("linewidth_mhz", 0.2)
    p = zeeman.ZeemanParameters(cfg.get("D_mhz", 2880.0), cfg.get("gyromagnetic_mhz_per_gauss", 2.8))

    n = int(math.floor((b_hi - b_lo) / step + 1e-9)) + 1
    grid = b_lo + step * np.arange(n)
    rows = zeeman.scan_rows(grid, p)
    write_csv(out / "transitions.csv", ["b_gauss", "orientation", "transition_label", "frequency_mhz"], rows)
    windows = zeeman.cross_relaxation_windows((b_lo, b_hi), step, guard, p)
    write_json(out / "windows.json", [w.as_dict() for w in windows])
    best = max((w.span_mhz for w in windows), default=0.0)
    return {
        "outputs": ["transitions.csv", "windows.json"],
        "n_windows": len(windows),
        "widest_span_mhz": best,
        "addressable_count": zeeman.addressable_count(best, linewidth),
        "linewidth_mhz": linewidth,
    }


def cmd_strain_scan(cfg, out, seed):
    lo = cfg.get("strain_min", 0.0)
    hi = cfg.get("strain_max", 1e-5)
    if hi < lo:
        raise ConfigError(f"strain_max ({hi}) is below strain_min ({lo})")
    n = 1 if hi == lo else cfg.get("n_points", 101)
    poisson = cfg.get("poisson", 0.11)
    couplings = strain.StrainCouplings(**cfg.get("couplings", {}))
    strains = np.linspace(lo, hi, n)
    rows = strain.scan_rows(strains, couplings, poisson)
    write_csv(out / "detunings.csv", ["strain", "orientation", "branch", "detuning_ghz"], rows)

    g = cfg.get("geometry", {})
    geom = strain.CantileverGeometry(
        length=g.get("length_um", 5.0),
        width=g.get("width_um", 0.5),
        height=g.get("height_um", 0.25),
        youngs_modulus=g.get("youngs_modulus_gpa", 1100.0),
        poisson=poisson,
    ).with_peak_strain(g.get("peak_strain", 4e-4))
    zs, xs, prof = strain.strain_profile(geom, g.get("n_z", 51), g.get("n_x", 11))
    write_csv(
        out / "cantilever_profile.csv",
        ["z_um", "x_um", "strain"],
        [(z, x, prof[i, j]) for i, z in enumerate(zs) for j, x in enumerate(xs)],
    )
    write_json(
        out / "cantilever.json",
        {
            "length_um": geom.length,
            "width_um": geom.width,
            "height_um": geom.height,
            "youngs_modulus_gpa": geom.youngs_modulus,
            "poisson": geom.poisson,
            "force_n": geom.force,
            "peak_strain": geom.peak_strain(),
            "peak_stress_mpa": geom.peak_strain() * geom.youngs_modulus * 1e3,
        },
    )
    linewidth = cfg.get("linewidth_mhz", 13.0)
    ex0 = strain.detunings(lo, zeeman.ALIGNED, couplings, poisson)[0]
    ex1 = strain.detunings(hi, zeeman.ALIGNED, couplings, poisson)[0]
    return {
        "outputs": ["detunings.csv", "cantilever_profile.csv", "cantilever.json"],
        "aligned_ex_shift_ghz": ex1 - ex0,
        "addressable_count": math.floor(abs(ex1 - ex0) * 1e3 / linewidth + 1e-9),
        "linewidth_mhz": linewidth,
    }


def cmd_gates(cfg, out, seed):
    nu = cfg.get("nu_dip_khz", 100.0)
    rabi = cfg.get("rabi_mhz", 10.0)
    names = cfg.get("constructions", list(GATE_BUILDERS))
    report, sequences = [], {}
    unitary_dir = out / "unitaries"
    unitary_dir.mkdir(exist_ok=True)
    for name in names:
        build, ideal_fn = GATE_BUILDERS[name]
        seq = build()
        u = gates.compile(seq)
        ideal = ideal_fn()
        phase_dev = float(np.max(np.abs(u - global_phase(u, ideal) * ideal)))
        report.append(
            {
                "name": name,
                "fidelity_vs_ideal": grape.fidelity(u, ideal),
                "equal_up_to_global_phase": equal_up_to_global_phase(u, ideal, 1e-9),
                "max_deviation_after_phase": phase_dev,
                "unitary": is_unitary(u),
                "gate_census": gates.census(seq),
                "duration_us": gates.total_gate_time(seq, nu, rabi),
            }
        )
        sequences[name] = gates.to_dict(seq)
        header, rows = matrix_rows(u)
        write_csv(unitary_dir / f"{name}.csv", header, rows)
    write_json(out / "gates.json", report)
    write_json(out / "sequences.json", sequences)
    ok = all(r["equal_up_to_global_phase"] for r in report)
    return {"outputs": ["gates.json", "sequences.json", "unitaries/"], "all_match": ok, "nu_dip_khz": nu, "rabi_mhz": rabi}


def cmd_error_budget(cfg, out, seed):
    params = error_budget.ErrorParams(
        t=cfg.get("t_us", 20.0),
        T1=cfg.get("T1_ms", 50.0),
        T2=cfg.get("T2_ms", 1.0),
        delta1=cfg.get("delta1_khz", 10.0),
        omega_mw=cfg.get("omega_mw_khz", 800.0),
        omega_opt=cfg.get("omega_opt_mhz", 10.0),
        delta_mag=cfg.get("delta_mag_mhz", 20.0),
        delta_str=cfg.get("delta_str_mhz", 500.0),
        nu_dip=cfg.get("nu_dip_khz", 100.0),
    )
    budget = error_budget.error_probability(params)
    write_json(out / "error_budget.json", {"parameters": params.__dict__, "budget": budget.as_dict()})
    outputs = ["error_budget.json"]
    if "omega_mw_sweep_khz" in cfg:
        rows = [
            (w, *(getattr(b, t) for t in error_budget.TERMS), b.total)
            for w, b in error_budget.sweep_omega_mw(params, cfg["omega_mw_sweep_khz"])
        ]
        write_csv(out / "omega_mw_sweep.csv", ["omega_mw_khz", *error_budget.TERMS, "total"], rows)
        outputs.append("omega_mw_sweep.csv")
    return {"outputs": outputs, "total": budget.total, "n_discrepancies": len(budget.discrepancies)}


def _grape_target(cfg, n_qubits):
    target = cfg.get("target", "cnot" if n_qubits == 2 else "toffoli")
    if isinstance(target, dict):
        rows = target["matrix"]
        if len({len(r) for r in rows}) > 1:
            raise ConfigError("target matrix rows differ in length")
        return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex).reshape(len(rows), -1)
    named = {
        "cnot": (2, gates.cnot_matrix),
        "cz": (2, gates.cz_matrix),
        "toffoli": (3, gates.toffoli_matrix),
    }
    if target == "identity":
        return np.eye(2**n_qubits, dtype=complex)
    width, fn = named[target]
    if width != n_qubits:
        raise ConfigError(f"target {target!r} needs n_qubits={width}")
    return fn()


def _grape_couplings(cfg, n_qubits):
    c = cfg.get("couplings_khz", 100.0)
    if isinstance(c, list):
        pairs = {}
        for item in c:
            a, b = item["pair"]
            if not (0 <= a < n_qubits and 0 <= b < n_qubits) or a == b:
                raise ConfigError(f"invalid coupling pair {item['pair']}")
            pairs[(a, b)] = item["nu_khz"]
        return pairs
    return c


def cmd_grape(cfg, out, seed):
    n = cfg.get("n_qubits", 2)
    seed = cfg.get("seed", 0) if seed is None else seed
    target = _grape_target(cfg, n)
    if target.shape != (2**n, 2**n) or not is_unitary(target, 1e-9):
        raise ConfigError("target must be a unitary of dimension 2^n_qubits")
    try:
        prob = grape.ControlProblem.for_target(
            target,
            n,
            couplings_khz=_grape_couplings(cfg, n),
            n_slices=cfg.get("n_slices", 40),
            slice_duration=cfg.get("slice_us", 1.0),
            amplitude_bound=cfg.get("amplitude_bound_mhz", 10.0),
            zz_factor=cfg.get("zz_factor", grape.DEFAULT_ZZ_FACTOR),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    init = grape.PulseSequence.random(prob, seed, cfg.get("init_scale_mhz", 0.1))
    result = grape.optimize(
        prob,
        init,
        max_iters=cfg.get("max_iters", 2000),
        step_rule=cfg.get("step_rule", "armijo"),
        target_fidelity=cfg.get("target_fidelity", 0.99),
        seed=seed,
        step=cfg.get("step", 1.0),
    )
    amps = result.pulses.amplitudes
    write_csv(
        out / "pulses.csv",
        ["slice_index", "control_name", "amplitude_mhz"],
        [(k, prob.control_names[j], amps[k, j]) for k in range(prob.n_slices) for j in range(prob.n_controls)],
    )
    write_csv(out / "fidelity_trace.csv", ["iteration", "fidelity"], list(enumerate(result.fidelity_trace)))
    u = grape.propagate(prob, result.pulses)
    chi_opt = tomography.chi_matrix(u, n)
    chi_ideal = tomography.chi_matrix(target, n)
    write_json(out / "chi_optimized.json", tomography.chi_entries(chi_opt, n))
    write_json(out / "chi_ideal.json", tomography.chi_entries(chi_ideal, n))
    return {
        "outputs": ["pulses.csv", "fidelity_trace.csv", "chi_optimized.json", "chi_ideal.json"],
        "status": "ok" if result.converged else "not_converged",
        "converged": result.converged,
        "final_fidelity": result.fidelity,
        "iterations": result.iterations,
        "seed": seed,
        "chi_frobenius_distance": float(np.linalg.norm(chi_opt - chi_ideal)),
        "process_fidelity": tomography.process_fidelity(u, target),
        "total_duration_us": prob.duration,
    }


COMMANDS = {
    "zeeman-scan": cmd_zeeman_scan,
    "strain-scan": cmd_strain_scan,
    "gates": cmd_gates,
    "error-budget": cmd_error_budget,
    "grape": cmd_grape,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="nvforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="JSON config (defaults apply when omitted)")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None)
    return parser


def run(command, config_path, out, seed=None):
    """Run one subcommand; returns the metadata dict written to ``out/metadata.json``."""
    cfg = load_config(command, config_path)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    summary = COMMANDS[command](cfg, out, seed)
    meta = {"command": command, "schema_version": SCHEMA_VERSION, "status": "ok", "seed": seed, **summary}
    write_json(out / "metadata.json", meta)
    return meta


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        run(args.command, args.config, args.out, args.seed)
    except ConfigError as exc:
        print(f"nvforge {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
