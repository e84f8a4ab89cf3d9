"""Command-line driver for the laboratory.

Subcommands: witness, resonance, diophantine, growth, simulate, inflate,
reproduce-all. Parameter precedence is explicit flags, then KEY=VALUE pairs
from --config, then built-in defaults. Every run that writes files also
writes a manifest (command, resolved params, sha256 of file inputs, package
version, wall time, output paths) next to them.

Exit codes: 0 success, 1 validation failure or failed checks, 2 resource
budget exceeded (argparse also exits 2 on malformed flags).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from .errors import ResourceBudgetError, SimulationBlowup
from .spectral import Domain, sobolev_norm
from .witness import WitnessConfig, WitnessPair, build_witness, data_norm
from .resonance import (closed_form_profiles, solve_diophantine,
                        verify_resonance_bounds)
from .flow_derivative import growth_table
from .simulator import (SimConfig, Stepper, full_norm, inflation_experiment,
                        linear_energy, windowed_norm, witness_state)
from .acceptance import run_criteria

VERSION = "0.1.0"


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _read_config(path: str) -> dict:
    """KEY=VALUE lines; blank lines and #-comments ignored."""
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, _, val = line.partition("=")
            out[key.strip().lower().replace("-", "_")] = val.strip()
    return out


def _n_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


def _int_list(text) -> list:
    return _n_list(text)


def _float_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


# (name, cast, default, help); cast applies to config-file strings too
_PARAMS = {
    "witness": [
        ("domain", str, "torus", "torus or line"),
        ("p", int, 2, "nonlinearity power, integer >= 2"),
        ("n", int, 16, "frequency scale N"),
        ("s", float, -1.0, "data regularity index"),
        ("sigma", float, None, "amplitude exponent, default s+1"),
        ("out", str, None, "output JSON path"),
    ],
    "resonance": [
        ("domain", str, "torus", "torus or line"),
        ("p", int, 2, "nonlinearity power"),
        ("n_list", _n_list, [16, 32, 64, 128], "comma-separated N values"),
        ("scan_max", int, None, "dense-scan ceiling, default max(N)"),
        ("out", str, None, "output JSON path"),
    ],
    "diophantine": [
        ("p", int, 3, "odd nonlinearity power"),
        ("out", str, None, "output JSON path"),
    ],
    "growth": [
        ("domain", str, "torus", "torus or line"),
        ("p", int, 2, "nonlinearity power"),
        ("s", float, -1.0, "data regularity index"),
        ("sigma", float, None, "amplitude exponent, default s+1"),
        ("t", float, 1.0, "measurement time"),
        ("n_list", _n_list, [16, 32, 64, 128, 256, 512], "N sweep"),
        ("sign", int, 1, "nonlinearity sign, +1 or -1"),
        ("out", str, None, "output CSV path"),
    ],
    "simulate": [
        ("p", int, 2, "nonlinearity power"),
        ("n", int, 16, "witness frequency scale N"),
        ("s", float, -1.0, "data regularity index"),
        ("sigma", float, None, "amplitude exponent, default s+1"),
        ("k", int, None, "mode cutoff, default 4*(max support frequency)"),
        ("dt", float, None, "time step, default 0.5/lambda(K)"),
        ("t_end", float, 1.0, "final time"),
        ("sign", int, 1, "nonlinearity sign; 0 disables the nonlinearity"),
        ("scale", float, 1.0, "multiply the witness data by this factor"),
        ("init", str, None, "load the initial pair from this JSON file"),
        ("norm_s", _float_list, None,
         "comma-separated s values for the norm columns, default the data s"),
        ("observe_every", int, None,
         "record every k-th step, default ~512 rows total"),
        ("out", str, None, "trajectory CSV path"),
    ],
    "inflate": [
        ("p", int, 2, "nonlinearity power"),
        ("s", float, -0.6, "data regularity index"),
        ("n_list", _n_list, [16, 32, 64, 128], "N sweep"),
        ("delta", float, 1e-2, "data size"),
        ("t_end", float, 1.0, "time horizon"),
        ("sign", int, 1, "nonlinearity sign"),
        ("out", str, None, "output JSON path"),
    ],
    "reproduce-all": [
        ("criteria", _int_list, list(range(1, 9)),
         "comma-separated criterion numbers"),
        ("out_dir", str, None, "directory for tables and reports"),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bqlab",
        description="Numerical laboratory for rough-data ill-posedness of "
                    "generalized Boussinesq equations")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, params in _PARAMS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None,
                        help="KEY=VALUE file; flags take precedence")
        for key, _cast, default, help_text in params:
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, default=None,
                            help=f"{help_text} (default {default})")
    return parser


def _resolve_params(args) -> dict:
    config = _read_config(args.config) if args.config else {}
    resolved = {}
    for key, cast, default, _help in _PARAMS[args.command]:
        raw = getattr(args, key)
        if raw is None and key in config:
            raw = config[key]
        if raw is None:
            resolved[key] = default
        else:
            resolved[key] = cast(raw)
    return resolved


def _domain(params) -> Domain:
    try:
        return Domain(params["domain"])
    except ValueError:
        raise ValueError(f"unknown domain {params['domain']!r}; "
                         "use torus or line")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def _witness_config(params, domain=Domain.TORUS) -> WitnessConfig:
    return WitnessConfig(domain, params["p"], params["n"], params["s"],
                         params["sigma"])


# -- subcommand bodies: return (output paths, exit code) ---------------------

def cmd_witness(params):
    cfg = _witness_config(params, _domain(params))
    pair = build_witness(cfg)
    print(f"witness p={cfg.p} N={cfg.N} {cfg.domain.value}: "
          f"sigma={cfg.sigma:g}, window={pair.output_window}, "
          f"data norm (s={cfg.s:g}) = {data_norm(pair, cfg.s):.6e}")
    if params["out"]:
        pair.to_json(params["out"])
        return [params["out"]], 0
    return [], 0


def cmd_resonance(params):
    domain = _domain(params)
    report = verify_resonance_bounds(params["p"], domain, params["n_list"],
                                     scan_max=params["scan_max"])
    n_viol = sum(len(e["violations"]) for e in report.per_N)
    print(f"resonance p={params['p']} {domain.value}: N0={report.N0}, "
          f"{n_viol} violations in reported N")
    for e in report.per_N:
        print(f"  N={e['N']}: {e['n_representations']} representations, "
              f"|beta|/N^{report.scale_power} in "
              f"[{e['beta_over_scale_min']}, {e['beta_over_scale_max']}], "
              f"{len(e['violations'])} violations")
    if params["out"]:
        _write_json(params["out"], report.to_dict())
        return [params["out"]], 0
    return [], 0


def cmd_diophantine(params):
    p = params["p"]
    brute = sorted(solve_diophantine(p))
    closed = sorted(closed_form_profiles(p))
    match = brute == closed
    print(f"diophantine p={p}: {len(brute)} profiles, closed form "
          f"{'matches' if match else 'MISMATCH'}")
    for prof in brute:
        print(f"  (n1,n2,n3,n4) = {prof}")
    if params["out"]:
        _write_json(params["out"], {"p": p, "profiles": [list(x) for x in brute],
                                    "closed_form_match": match})
        return [params["out"]], 0 if match else 1
    return [], 0 if match else 1


def cmd_growth(params):
    domain = _domain(params)
    table = growth_table(params["p"], domain, params["s"], params["sigma"],
                         params["t"], params["n_list"], sign=params["sign"])
    print(f"growth p={params['p']} {domain.value} s={params['s']:g} "
          f"t={params['t']:g}: slope {table.slope:+.4f} "
          f"(predicted {table.predicted_slope:+.4f})")
    for r in table.records:
        print(f"  N={r.N}: ratio {r.ratio:.6e}, running slope "
              f"{r.slope_running:+.4f}")
    if params["out"]:
        table.to_csv(params["out"])
        return [params["out"]], 0
    return [], 0


def cmd_simulate(params):
    inputs = []
    if params["init"]:
        pair = WitnessPair.from_json(params["init"])
        inputs.append(params["init"])
    else:
        pair = build_witness(_witness_config(params))
    max_freq = pair.u0.support.max_frequency()
    K = params["k"] if params["k"] is not None else 4 * int(round(max_freq))
    state = witness_state(pair, K)
    if params["scale"] != 1.0:
        state.u *= params["scale"]
        state.v *= params["scale"]
    stepper = Stepper(SimConfig(p=params["p"], K=K, dt=params["dt"],
                                sign=params["sign"]))
    norm_s = params["norm_s"] or [pair.config.s]
    window = (int(round(pair.output_window)),)
    n_steps = max(1, int(round(params["t_end"] / stepper.dt)))
    every = params["observe_every"] or max(1, n_steps // 512)
    rows = []
    counter = {"i": 0}

    def observe(st):
        i = counter["i"]
        counter["i"] = i + 1
        if i % every == 0 or st.t >= params["t_end"] - 1e-12:
            rows.append([st.t]
                        + [windowed_norm(st, window, s) for s in norm_s]
                        + [full_norm(st, s) for s in norm_s])

    e0 = linear_energy(state)
    final = stepper.integrate(state, params["t_end"], observer=observe)
    e1 = linear_energy(final)
    mask = e0 > 0
    drift = float(np.abs(e1[mask] / e0[mask] - 1.0).max()) if mask.any() else 0.0
    print(f"simulate p={params['p']} K={K} dt={stepper.dt:g} "
          f"sign={params['sign']}: reached t={final.t:g} "
          f"({len(rows)} records, window mode {window[0]}), "
          f"linear-mode energy drift {drift:.3e}")
    if params["out"]:
        header = (["t"] + [f"window_h{s:g}" for s in norm_s]
                  + [f"full_h{s:g}" for s in norm_s])
        with open(params["out"], "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(f"{x:.12g}" for x in row) + "\n")
        return [params["out"]], 0, inputs
    return [], 0, inputs


def cmd_inflate(params):
    result = inflation_experiment(params["s"], params["n_list"],
                                  p=params["p"], delta=params["delta"],
                                  t_end=params["t_end"],
                                  sign=params["sign"])
    print(f"inflate p={params['p']} s={params['s']:g} "
          f"delta={params['delta']:g}:")
    for row in result.rows:
        print(f"  N={row.N}: sup window norm {row.sup_window_norm:.6e} "
              f"at t={row.t_peak:.4f} (initial {row.initial_window_norm:.3e})")
    if params["out"]:
        payload = {"p": result.p, "s": result.s, "delta": result.delta,
                   "t_end": result.t_end,
                   "window_modes": list(result.window_modes),
                   "rows": [vars(r) for r in result.rows]}
        _write_json(params["out"], payload)
        return [params["out"]], 0
    return [], 0


def cmd_reproduce_all(params):
    results = run_criteria(params["criteria"], out_dir=params["out_dir"])
    outputs = []
    if params["out_dir"]:
        summary = os.path.join(params["out_dir"], "criteria_summary.json")
        _write_json(summary, [{"number": r.number, "name": r.name,
                               "passed": r.passed, "elapsed_s": r.elapsed,
                               "details": r.details} for r in results])
        outputs.append(summary)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return outputs, 0 if n_fail == 0 else 1


_COMMANDS = {"witness": cmd_witness, "resonance": cmd_resonance,
             "diophantine": cmd_diophantine, "growth": cmd_growth,
             "simulate": cmd_simulate, "inflate": cmd_inflate,
             "reproduce-all": cmd_reproduce_all}


def _manifest_path(params, outputs):
    if params.get("out_dir"):
        return os.path.join(params["out_dir"], "manifest.json")
    if outputs:
        return outputs[0] + ".manifest.json"
    return None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        params = _resolve_params(args)
        result = _COMMANDS[args.command](params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SimulationBlowup as exc:
        print(f"error: simulation blew up: {exc}", file=sys.stderr)
        return 1
    except ResourceBudgetError as exc:
        print(f"error: resource budget exceeded: {exc}", file=sys.stderr)
        return 2
    if len(result) == 3:
        outputs, code, inputs = result
    else:
        outputs, code = result
        inputs = []
    if args.config:
        inputs.append(args.config)
    mpath = _manifest_path(params, outputs)
    if mpath is not None:
        manifest = {"command": args.command,
                    "params": {k: v for k, v in params.items()},
                    "inputs": {path: _sha256(path) for path in inputs},
                    "version": VERSION,
                    "wall_time_s": round(time.perf_counter() - t0, 3),
                    "outputs": outputs}
        _write_json(mpath, manifest)
    return code


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
