"""Command line entry point.

    adaptive-consensus list-scenarios
    adaptive-consensus validate --scenario fig2b
    adaptive-consensus run --scenario fig1a --out results/
    adaptive-consensus run --all --out results/ --seed-free
    adaptive-consensus sweep --scenario my.json --axis gamma --values 1,5,25

Exit codes: 0 success, 1 nondeterminism caught by ``--seed-free``,
2 validation failure, 3 divergence, 4 I/O error.
"""
import argparse
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis
from .errors import DivergenceError, PreconditionError, ScenarioError
from .graph import lemma1_certificate, min_eig_l_plus_k
from .scenario import BUNDLED, load_scenario
from .sim import run, run_batch

EXIT_OK = 0
EXIT_NONDETERMINISTIC = 1
EXIT_VALIDATION = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4

SWEEP_AXES = ("gamma", "k", "coeff-derivative", "h")


def trajectory_columns(g):
    n = range(1, g.n + 1)
    return (["t"] + [f"x_{i}" for i in n] + [f"r_{i}" for i in n] + [f"e_{i}" for i in n]
            + ["V", "e_norm", "consensus_gap"])


def diagnostics_columns(g):
    return (list(analysis.DIAGNOSTIC_COLUMNS) + [f"w_hat_{i}" for i in range(1, g.n + 1)]
            + [f"w_hat_{i}_{j}" for i, j in g.directed_edges])


def _table(columns, data):
    buf = io.StringIO()
    np.savetxt(buf, data, fmt="%.17g", delimiter=",", header=",".join(columns), comments="")
    return buf.getvalue()


def _num(v):
    return None if v is None or (isinstance(v, float) and not math.isfinite(v)) else float(v)


def summarize(traj, scenario, tol=1e-2):
    g = scenario.graph
    rep = analysis.consensus_report(traj, scenario.x0, tol)
    out = {
        "name": scenario.name,
        "status": "diverged" if traj.diverged_at is not None else "ok",
        "diverged_at": _num(traj.diverged_at),
        "n": g.n,
        "controller": scenario.controller is not None,
        "sim": {"h": scenario.sim.h, "T": scenario.sim.T, "integrator": scenario.sim.integrator,
                "stride": scenario.sim.stride},
        "rows": len(traj),
        "t_final": float(traj.t[-1]),
        "x_final": [float(v) for v in traj.x[-1]],
        "e_norm_final": float(traj.e_norm[-1]),
        "e_norm_max": float(np.max(traj.e_norm)),
        "consensus": rep.as_dict(),
        "lyapunov_max_step_increase": analysis.max_step_increase(traj.V),
    }
    cfg = scenario.controller
    if cfg is not None:
        w_star = analysis.perturbation_bound(scenario.coefficients, cfg, g)
        lam, _ = lemma1_certificate(g, cfg.k)
        out["bounds"] = {
            "lambda_min_L_plus_K": lam,
            "w_star": w_star,
            "ultimate_bound": analysis.ultimate_bound(g, cfg.k, w_star),
            "decrease_radius": analysis.decrease_radius(g, cfg.k, w_star),
            "projection_radius": cfg.radius,
            "max_abs_estimate": float(max(np.max(np.abs(traj.w_hat_node), initial=0.0),
                                          np.max(np.abs(traj.w_hat_edge), initial=0.0))),
        }
    return out


def render_outputs(traj, scenario, tol=1e-2):
    """File name -> text for one run."""
    g = scenario.graph
    traj_data = np.column_stack([traj.t, traj.x, traj.r, traj.e, traj.V, traj.e_norm, traj.consensus_gap])
    diag = analysis.diagnostics_table(traj, scenario)
    diag_data = np.column_stack([diag[c] for c in analysis.DIAGNOSTIC_COLUMNS]
                                + [traj.w_hat_node, traj.w_hat_edge])
    return {
        "trajectory.csv": _table(trajectory_columns(g), traj_data),
        "diagnostics.csv": _table(diagnostics_columns(g), diag_data),
        "summary.json": json.dumps(summarize(traj, scenario, tol), indent=2) + "\n",
    }


def write_outputs(files, outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (outdir / name).write_text(text)


def _scale(values, s):
    return tuple(v * s for v in values)


def sweep_variant(scenario, axis, value):
    if axis == "h":
        return scenario.with_sim(h=float(value), stride=1)
    sc = scenario.with_sim(stride=1)
    if axis == "coeff-derivative":
        return replace(sc, coefficients=sc.coefficients.scaled_derivatives(value))
    if scenario.controller is None:
        raise ScenarioError(f"axis {axis!r} needs an enabled controller", "controller")
    if axis == "gamma":
        return sc.with_controller(gamma_node=_scale(sc.controller.gamma_node, value),
                                  gamma_edge=_scale(sc.controller.gamma_edge, value))
    if axis == "k":
        return sc.with_controller(k=_scale(sc.controller.k, value))
    raise ScenarioError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}", "axis")


def sweep_command(scenario, axis, values, tol=1e-2):
    """One row per value: terminal error, settling time, ``w*`` and the ultimate bound."""
    if axis not in SWEEP_AXES:
        raise ScenarioError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}", "axis")
    rows = []
    for value in values:
        if not (math.isfinite(value) and value > 0):
            raise ScenarioError(f"sweep values must be positive, got {value}", "values")
        sc = sweep_variant(scenario, axis, value).validate()
        traj = run(sc)
        rep = analysis.consensus_report(traj, sc.x0, tol)
        cfg = sc.controller
        if cfg is not None:
            w_star = analysis.perturbation_bound(sc.coefficients, cfg, sc.graph)
            lam = min_eig_l_plus_k(sc.graph, cfg.k)
            bound = analysis.ultimate_bound(sc.graph, cfg.k, w_star)
        else:
            w_star = lam = bound = math.nan
        row = {"axis": axis, "value": float(value), "terminal_e_norm": float(traj.e_norm[-1]),
               "settling_time": rep.settling_time, "lambda_min": lam, "w_star": w_star, "ultimate_bound": bound}
        row.update({f"x_{i + 1}": float(v) for i, v in enumerate(traj.x[-1])})
        rows.append(row)
    return rows


def format_sweep(rows):
    cols = list(rows[0])
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(r[c] if isinstance(r[c], str) else
                              ("" if r[c] is None else format(r[c], ".17g")) for c in cols))
    return "\n".join(lines) + "\n"


def _load_all(names):
    return [load_scenario(s) for s in names]


def _cmd_list(args):
    for name in BUNDLED:
        print(name)
    return EXIT_OK


def _cmd_validate(args):
    for sc in _load_all(args.scenario):
        print(f"{sc.name}: ok")
    return EXIT_OK


def _cmd_run(args):
    names = list(args.scenario or [])
    if args.all:
        names += list(BUNDLED)
    if not names:
        print("error: give --scenario or --all", file=sys.stderr)
        return EXIT_VALIDATION
    scenarios = _load_all(names)
    if args.stride is not None:
        scenarios = [sc.with_sim(stride=args.stride).validate() for sc in scenarios]
    if len({sc.name for sc in scenarios}) != len(scenarios):
        print("error: scenario names must be unique within one run", file=sys.stderr)
        return EXIT_VALIDATION
    results = run_batch(scenarios, workers=args.workers)
    status = EXIT_OK
    out = Path(args.out)
    for sc, res in zip(scenarios, results):
        traj = res.partial if isinstance(res, DivergenceError) else res
        if traj is None:
            print(f"{sc.name}: diverged at t={res.t:.6g}", file=sys.stderr)
            status = EXIT_DIVERGENCE
            continue
        files = render_outputs(traj, sc, args.tol)
        if args.seed_free:
            again = run_batch([sc])[0]
            again = again.partial if isinstance(again, DivergenceError) else again
            if render_outputs(again, sc, args.tol) != files:
                print(f"{sc.name}: outputs differ between identical runs", file=sys.stderr)
                return EXIT_NONDETERMINISTIC
        write_outputs(files, out / sc.name)
        summary = json.loads(files["summary.json"])
        if isinstance(res, DivergenceError):
            print(f"{sc.name}: diverged at t={res.t:.6g}", file=sys.stderr)
            status = EXIT_DIVERGENCE
        else:
            c = summary["consensus"]
            print(f"{sc.name}: {c['verdict']} target={c['target']:.6g} final_gap={c['final_gap']:.3e} "
                  f"e_norm={summary['e_norm_final']:.3e}")
    return status


def _cmd_sweep(args):
    sc = load_scenario(args.scenario)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError(f"cannot parse values {args.values!r}", "values") from None
    if not values:
        raise ScenarioError("no values given", "values")
    text = format_sweep(sweep_command(sc, args.axis, values, args.tol))
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="adaptive-consensus", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list-scenarios", help="list bundled scenarios").set_defaults(func=_cmd_list)

    v = sub.add_parser("validate", help="parse and validate scenario files")
    v.add_argument("--scenario", action="append", required=True, help="path or bundled name; repeatable")
    v.set_defaults(func=_cmd_validate)

    r = sub.add_parser("run", help="simulate scenarios and export tables")
    r.add_argument("--scenario", action="append", help="path or bundled name; repeatable")
    r.add_argument("--all", action="store_true", help="run every bundled scenario")
    r.add_argument("--out", default="results", help="output directory (one subdirectory per scenario)")
    r.add_argument("--stride", type=int, help="override steps per recorded row")
    r.add_argument("--seed-free", action="store_true",
                   help="run each scenario twice and fail unless outputs are byte-identical")
    r.add_argument("--workers", type=int, default=None, help="parallel scenarios")
    r.add_argument("--tol", type=float, default=1e-2, help="consensus tolerance")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="vary one parameter and tabulate bounds and outcomes")
    s.add_argument("--scenario", required=True)
    s.add_argument("--axis", required=True, choices=SWEEP_AXES)
    s.add_argument("--values", required=True, help="comma separated, e.g. 1,5,25")
    s.add_argument("--out", help="CSV path; stdout if omitted")
    s.add_argument("--tol", type=float, default=1e-2)
    s.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except (ScenarioError, PreconditionError) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
