"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.  Errors are reported as one JSON object on standard error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import config as cfgmod
from . import io, svg
from .counting import Poisson
from .fluxes import mean_induction, threshold_to_json
from .kernels import Decentral, calibrate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("field", "orbit", "sweep", "chaos", "graph-mc", "calibrate", "plot",
            "telegrapher-check")


class NumericFailure(RuntimeError):
    """Run finished without a usable numerical result."""


def _log(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _outdir(args, doc):
    d = args.out or doc.get("output", {}).get("directory", ".")
    os.makedirs(d, exist_ok=True)
    return d


def _formats(doc):
    return doc.get("output", {}).get("formats", ["csv"])


def _load(args):
    if not args.config:
        raise cfgmod.ConfigError("--config is required for this command")
    return cfgmod.resolve(cfgmod.load(args.config))


def _finish(args, outdir, command, doc, seed, outputs, t0, results=None):
    io.write_manifest(outdir, command, doc, seed, outputs, time.perf_counter() - t0, results)
    _log(args, f"{command}: wrote {', '.join(os.path.basename(p) for p in outputs)} "
               f"and manifest.json to {outdir}")


def cmd_field(args):
    from .field import derived_fields, solve

    t0 = time.perf_counter()
    doc = _load(args)
    seed = cfgmod.resolve_seed(doc, args.seed, required=False)
    fc = cfgmod.build_field_config(doc)
    sol = solve(fc)
    if sol.blowup_time is not None:
        raise NumericFailure(f"transport blow-up: |P| > 2 at t={sol.blowup_time:.6g}")
    derived_fields(sol, fc)
    outdir = _outdir(args, doc)
    nt, nx = sol.P.shape
    field_csv = io.write_csv(
        os.path.join(outdir, "field.csv"), ["t", "x", "P", "Q", "G", "H"],
        [np.repeat(sol.times, nx), np.tile(sol.xs, nt), sol.P.ravel(), sol.Q.ravel(),
         sol.G.ravel(), sol.H.ravel()])
    fr = sol.frontier
    frontier_csv = io.write_csv(
        os.path.join(outdir, "frontier.csv"), ["t", "x_cross", "branch_index"],
        [np.array([r[0] for r in fr], float), np.array([r[1] for r in fr], float),
         np.array([r[2] for r in fr], np.int64)])
    outputs = [field_csv, frontier_csv]
    if "svg" in _formats(doc):
        svg.heatmap(os.path.join(outdir, "field.svg"), sol.xs, sol.times, sol.P,
                    "activation field P")
        svg.heatmap(os.path.join(outdir, "field_H.svg"), sol.xs, sol.times, sol.H,
                    "entropy field H")
    doc["solver"]["grid_points"] = fc.grid_points
    results = {"clamped": sol.clamped, "final_min": float(sol.P[-1].min()),
               "final_max": float(sol.P[-1].max()), "grid_points": fc.grid_points,
               "saved_rows": int(nt)}
    _finish(args, outdir, "field", doc, seed, outputs, t0, results)
    return EXIT_OK


def cmd_telegrapher(args):
    from .field import telegrapher_check

    t0 = time.perf_counter()
    doc = _load(args)
    tg = doc["telegrapher"]
    law, kernel = cfgmod.build_law(doc), cfgmod.build_kernel(doc["kernel"])
    flux = cfgmod.build_flux(doc)
    levels = telegrapher_check(law, kernel, flux.k, float(tg["a"]), float(tg["v"]),
                               tg["grids"], float(tg["t_end"]), float(tg["cfl"]),
                               flux.self_interaction)
    outdir = _outdir(args, doc)
    path = io.write_csv(
        os.path.join(outdir, "telegrapher.csv"),
        ["grid_points", "dx", "dt", "residual_first", "residual_first_over_dx",
         "residual_second"],
        [np.array([lv.grid_points for lv in levels], np.int64),
         np.array([lv.dx for lv in levels]), np.array([lv.dt for lv in levels]),
         np.array([lv.residual_first for lv in levels]),
         np.array([lv.ratio_to_dx for lv in levels]),
         np.array([lv.residual_second for lv in levels])])
    r1 = [lv.residual_first for lv in levels]
    orders = [math.log2(a / b) for a, b in zip(r1[:-1], r1[1:])]
    results = {
        "max_interior_residual": r1[-1],
        "residual_over_dx": [lv.ratio_to_dx for lv in levels],
        "observed_orders": orders,
        "within_5dx": all(lv.ratio_to_dx <= 5.0 for lv in levels),
        "decreasing": all(b < a for a, b in zip(r1[:-1], r1[1:])),
    }
    if not args.quiet:
        print(json.dumps(results, indent=2))
    _finish(args, outdir, "telegrapher-check", doc, None, [path], t0, results)
    return EXIT_OK


def _orbit_rows(trace):
    n = trace.xi.size
    gain = np.full(n, np.nan)
    loss = np.full(n, np.nan)
    gain[:trace.gain.size] = trace.gain
    loss[:trace.loss.size] = trace.loss
    return [np.arange(n, dtype=np.int64), trace.xi, gain, loss]


def cmd_orbit(args):
    from .orbits import orbit

    t0 = time.perf_counter()
    doc = _load(args)
    seed = cfgmod.resolve_seed(doc, args.seed, required=False)
    oc = cfgmod.build_orbit_config(doc)
    trace = orbit(oc)
    outdir = _outdir(args, doc)
    path = io.write_csv(os.path.join(outdir, "orbit.csv"), ["n", "xi", "gain", "loss"],
                        _orbit_rows(trace))
    outputs = [path]
    if "svg" in _formats(doc):
        svg.line_plot(os.path.join(outdir, "orbit.svg"),
                      [("xi", np.arange(trace.xi.size), trace.xi)], "activation orbit",
                      "n", "xi", markers=True)
    results = {"xi0": float(trace.xi[0]), "final": float(trace.xi[-1]),
               "converged": trace.converged, "fixed_point": trace.fixed_point}
    _finish(args, outdir, "orbit", doc, seed, outputs, t0, results)
    return EXIT_OK


def cmd_sweep(args):
    from .orbits import fixed_point_sweep

    t0 = time.perf_counter()
    doc = _load(args)
    seed = cfgmod.resolve_seed(doc, args.seed, required=False)
    spec = doc["orbit"].get("sweep")
    if spec is None:
        raise cfgmod.ConfigError("orbit.sweep section is required for the sweep command")
    direction = spec.get("direction", "up-down")
    warm = spec.get("warm_start", True)
    param = spec["parameter"]
    values = cfgmod.sweep_values(spec)
    oc = cfgmod.build_orbit_config(doc)
    outdir = _outdir(args, doc)
    path = os.path.join(outdir, "sweep.csv")

    def show(v):
        return threshold_to_json(v) if param in ("m", "l") else v

    results = {"parameter": param, "direction": direction}
    if direction == "up-down":
        up = fixed_point_sweep(oc, param, values, warm)
        down = fixed_point_sweep(replace(oc, xi0=up[-1].last), param, values[::-1], warm)[::-1]
        io.write_table(path, ["value", "up", "up_status", "down", "down_status"],
                       [(show(v), u.last, u.status, d.last, d.status)
                        for v, u, d in zip(values, up, down)])
        gap = np.array([u.last - d.last for u, d in zip(up, down)])
        results["max_gap"] = float(np.max(np.abs(gap)))
        if param in ("r", "s"):
            from scipy.integrate import trapezoid
            results["loop_area"] = float(trapezoid(gap, values))
        series = [("up", values, [u.last for u in up]), ("down", values, [d.last for d in down])]
    else:
        vals = values if direction == "up" else values[::-1]
        entries = fixed_point_sweep(oc, param, vals, warm)
        io.write_table(path, ["value", "fixed_point", "status", "period", "steps"],
                       [(show(e.value), e.last, e.status, e.period, e.steps) for e in entries])
        series = [(direction, [e.value for e in entries], [e.last for e in entries])]
    if "svg" in _formats(doc) and param in ("r", "s"):
        svg.line_plot(os.path.join(outdir, "sweep.svg"), series, "fixed points",
                      param, "terminal activation", markers=True)
    _finish(args, outdir, "sweep", doc, seed, [path], t0, results)
    return EXIT_OK


def cmd_chaos(args):
    from .orbits import chaos_factor_closed_form, chaotic_orbit

    t0 = time.perf_counter()
    doc = _load(args)
    seed = cfgmod.resolve_seed(doc, args.seed, required=False)
    oc = cfgmod.build_orbit_config(doc, renormalize=True)
    ch = chaotic_orbit(oc)
    outdir = _outdir(args, doc)
    cob = io.write_csv(os.path.join(outdir, "cobweb.csv"), ["u", "map"],
                       [ch.map_u, ch.map_values])
    orb = io.write_csv(os.path.join(outdir, "orbit.csv"), ["n", "xi", "gain", "loss"],
                       _orbit_rows(ch.trace))
    results = {"chaos_factor": ch.scale, "map_max": float(ch.map_values.max())}
    if isinstance(oc.law, Poisson) and isinstance(oc.kernel, Decentral) and oc.l == 1:
        w = oc.kernel.p if oc.self_interaction else 0.0
        results["chaos_factor_closed_form"] = chaos_factor_closed_form(oc.law.c, oc.kernel.p, w)
    if "svg" in _formats(doc):
        svg.line_plot(os.path.join(outdir, "cobweb.svg"), [("map", ch.map_u, ch.map_values)],
                      "renormalized activation map", "xi", "next xi", diagonal=True)
    if not args.quiet:
        print(json.dumps(results, indent=2))
    _finish(args, outdir, "chaos", doc, seed, [cob, orb], t0, results)
    return EXIT_OK


def cmd_graph_mc(args):
    from .graphsim import replicate_seeds, run_replicates, sample_graph, summarize

    t0 = time.perf_counter()
    doc = _load(args)
    seed = cfgmod.resolve_seed(doc, args.seed, required=True)
    mc = doc["mc"]
    law = cfgmod.build_law(doc)
    specs = mc.get("kernels") or [doc.get("kernel")]
    if specs[0] is None:
        raise cfgmod.ConfigError("graph-mc needs a kernel or mc.kernels")
    k, l, n = int(mc["k"]), mc.get("l"), int(mc["replicates"])
    rows, summary = [], {}
    for i, spec in enumerate(specs):
        label = spec.get("label", f"{spec['family']}" if len(specs) == 1 else
                         f"{spec['family']}_{i}")
        kernel = cfgmod.build_kernel(spec)
        reps = run_replicates(law, kernel, k, n, seed, l)
        rows.extend((label, r.replicate, r.seed, r.K, r.V_k, r.iterations, r.terminal)
                    for r in reps)
        s = summarize([r.V_k for r in reps])
        s["predicted_mean"] = law.mean() * mean_induction(law, kernel, k)
        s["kernel"] = kernel.to_dict()
        if l is not None:
            s["terminal"] = summarize([r.terminal for r in reps])
        summary[label] = s
    outdir = _outdir(args, doc)
    rep = io.write_table(os.path.join(outdir, "replicates.csv"),
                         ["kernel", "replicate", "seed", "K", "V_k", "iterations", "terminal"],
                         rows)
    summ = io.write_json(os.path.join(outdir, "summary.json"), summary)
    outputs = [rep, summ]
    if mc.get("edges"):
        first = sample_graph(law, cfgmod.build_kernel(specs[0]),
                             int(replicate_seeds(seed, 1)[0]))
        e = first.edges()
        outputs.append(io.write_csv(os.path.join(outdir, "edges.csv"), ["i", "j"],
                                    [e[:, 0].astype(np.int64), e[:, 1].astype(np.int64)]))
    doc["mc"]["seed"] = seed
    _finish(args, outdir, "graph-mc", doc, seed, outputs, t0, {"summary": summary})
    return EXIT_OK


def cmd_calibrate(args):
    if args.family:
        if args.target is None:
            raise cfgmod.ConfigError("--target is required with --family")
        fixed = {}
        for item in args.fixed or []:
            key, _, val = item.partition("=")
            try:
                fixed[key] = float(val)
            except ValueError:
                raise cfgmod.ConfigError(f"bad --fixed entry {item!r}") from None
        family, target = args.family, args.target
    else:
        doc = cfgmod.load(args.config) if args.config else None
        if not doc or "target_mass" not in doc.get("kernel", {}):
            raise cfgmod.ConfigError("give --family/--target or a kernel calibration request")
        family = doc["kernel"]["family"]
        target = float(doc["kernel"]["target_mass"])
        fixed = doc["kernel"].get("fixed", {})
    kernel = calibrate(family, target, **fixed)
    params = kernel.to_dict()["params"]
    free = {"local": "r", "decentral": "p"}.get(family, "a")
    print("%.17g" % params[free])
    _log(args, json.dumps({"family": family, "target_mass": target, "params": params,
                           "mass": kernel.total_mass()}))
    return EXIT_OK


def _plot_one(path, outdir):
    header, rows = io.read_csv(path)
    if not rows:
        return []
    stem = os.path.splitext(os.path.basename(path))[0]
    cols = {h: [r[i] for r in rows] for i, h in enumerate(header)}

    def num(name):
        return np.array([float(v) if v not in ("", "inf") else np.inf for v in cols[name]])

    made = []
    if header[:3] == ["t", "x", "P"]:
        t, x = num("t"), num("x")
        ts, xs = np.unique(t), np.unique(x)
        for name in [h for h in ("P", "H") if h in cols]:
            Z = num(name).reshape(ts.size, xs.size)
            suffix = "" if name == "P" else f"_{name}"
            out = os.path.join(outdir, f"{stem}{suffix}.svg")
            svg.heatmap(out, xs, ts, Z, f"{name}(t, x)")
            made.append(out)
    elif header[:2] == ["n", "xi"]:
        out = os.path.join(outdir, f"{stem}.svg")
        svg.line_plot(out, [("xi", num("n"), num("xi"))], "orbit", "n", "xi", markers=True)
        made.append(out)
    elif header[:2] == ["u", "map"]:
        out = os.path.join(outdir, f"{stem}.svg")
        svg.line_plot(out, [("map", num("u"), num("map"))], "cobweb map", "xi", "next xi",
                      diagonal=True)
        made.append(out)
    elif header[0] == "value" and "up" in cols and "down" in cols:
        out = os.path.join(outdir, f"{stem}.svg")
        v = num("value")
        svg.line_plot(out, [("up", v, num("up")), ("down", v, num("down"))],
                      "fixed-point sweep", "parameter", "terminal activation", markers=True)
        made.append(out)
    elif header[:2] == ["value", "fixed_point"]:
        out = os.path.join(outdir, f"{stem}.svg")
        svg.line_plot(out, [("fixed point", num("value"), num("fixed_point"))],
                      "fixed-point sweep", "parameter", "terminal activation", markers=True)
        made.append(out)
    elif header == ["t", "x_cross", "branch_index"]:
        out = os.path.join(outdir, f"{stem}.svg")
        svg.line_plot(out, [("P = 1/2", num("x_cross"), num("t"))], "activation frontier",
                      "x", "t", markers=True)
        made.append(out)
    elif header[:2] == ["grid_points", "dx"]:
        out = os.path.join(outdir, f"{stem}.svg")
        svg.line_plot(out, [("first-order residual", num("dx"), num("residual_first"))],
                      "telegrapher residual", "dx", "max residual", markers=True)
        made.append(out)
    elif header[:2] == ["kernel", "replicate"]:
        out = os.path.join(outdir, f"{stem}.svg")
        series = []
        for label in sorted(set(cols["kernel"])):
            v = np.array([float(a) for a, b in zip(cols["V_k"], cols["kernel"]) if b == label])
            counts = np.bincount(v.astype(int))
            series.append((label, np.arange(counts.size), counts / v.size))
        svg.line_plot(out, series, "distribution of V_k", "V_k", "frequency")
        made.append(out)
    else:
        raise cfgmod.ConfigError(f"{path}: unrecognized CSV header {header}")
    return made


def cmd_plot(args):
    if not args.inputs:
        raise cfgmod.ConfigError("plot needs at least one input CSV")
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    made = []
    for path in args.inputs:
        try:
            out = _plot_one(path, outdir)
        except ValueError as exc:
            if isinstance(exc, cfgmod.ConfigError):
                raise
            raise cfgmod.ConfigError(str(exc)) from None
        if not out:
            _log(args, f"plot: {path} has a header but no data rows; skipped")
        made.extend(out)
    if not made:
        raise cfgmod.ConfigError("plot: no input had data rows")
    _log(args, "plot: wrote " + ", ".join(made))
    return EXIT_OK


HANDLERS = {
    "field": cmd_field, "orbit": cmd_orbit, "sweep": cmd_sweep, "chaos": cmd_chaos,
    "graph-mc": cmd_graph_mc, "calibrate": cmd_calibrate, "plot": cmd_plot,
    "telegrapher-check": cmd_telegrapher,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="itad", description="ITAD field equations, orbits "
                                     "and random-graph Monte Carlo.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config or run manifest")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=_u64, help="master seed (overrides ITAD_SEED)")
        p.add_argument("--quiet", action="store_true")
        if name == "calibrate":
            p.add_argument("--family")
            p.add_argument("--target", type=float)
            p.add_argument("--fixed", action="append", metavar="KEY=VALUE")
        if name == "plot":
            p.add_argument("inputs", nargs="*")
    return parser


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def exit_code_for(exc) -> int:
    from .field import IntegrationError
    from .graphsim import SimulationError
    from .orbits import ChaosFactorError

    if isinstance(exc, (NumericFailure, IntegrationError, SimulationError, ChaosFactorError,
                        ArithmeticError, FloatingPointError)):
        return EXIT_NUMERIC
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (ValueError, KeyError, TypeError)):
        return EXIT_CONFIG
    return EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except Exception as exc:  # reported as JSON with a mapped exit code
        code = exit_code_for(exc)
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code,
               "command": args.command}
        print(json.dumps(err), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
