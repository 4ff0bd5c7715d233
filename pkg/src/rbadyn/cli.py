"""Command-line front end.

Exit codes: 0 success/feasible, 1 usage, file or parse error, 2 numerical or
limit condition, 3 infeasible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import yaml

from . import resolve_path
from .assembly import assemble_eukaryotic, assemble_prokaryotic, assemble_turnover, build_extension, load_turnover
from .dynamics import ControlSignal, NegativityGuardError, control_from_dict, integrate, load_toy_problem
from .growth import BASAL_INADMISSIBLE, NoFiniteBracketError, feasibility_profile, mu_max
from .lp import INFEASIBLE, IterationLimitError, check_point, format_tableau, solve
from .model import ModelError, build_model, load_model_file, read_document
from .pmp import SteadyStateError, envelope_check, maximum_condition_gap, sweep
from .randmodels import random_model_document

EXIT_OK, EXIT_ERROR, EXIT_NUMERICAL, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_report(report: Dict[str, object], fmt: str = "text") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.keys())
        w.writerow([_fmt(v) for v in report.values()])
        return buf.getvalue()
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in report.items())


def _emit(text: str, output: Optional[str]):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _builder(args):
    spec = load_model_file(resolve_path(args.model))
    model = build_model(spec)
    turnover = load_turnover(resolve_path(args.turnover), model) if args.turnover else None
    if args.eukaryote:
        ext = build_extension(spec, model)
        return model, partial(assemble_eukaryotic, model, ext, turnover=turnover)
    if turnover is not None:
        return model, partial(assemble_turnover, model, turnover)
    return model, partial(assemble_prokaryotic, model)


def cmd_feasible(args) -> int:
    if args.mu is None:
        raise UsageError("feasible requires --mu")
    if args.mu < 0:
        raise UsageError("--mu must be nonnegative")
    _, build = _builder(args)
    lp = build(args.mu)
    if args.dump_lp:
        Path(args.dump_lp).write_text(format_tableau(lp))
    res = solve(lp)
    report = {"status": res.status, "mu": args.mu, "iterations": res.iterations,
              "max_residual_eq": res.max_residual_eq, "max_residual_ineq": res.max_residual_ineq,
              "degenerate": res.degenerate}
    if res.feasible:
        chk = check_point(lp, res.witness)
        report["check_point"] = chk.passed
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["variable", "value"])
        if res.feasible:
            for name, v in zip(lp.variable_names, res.witness):
                w.writerow([name, _fmt(v)])
        _emit(buf.getvalue(), args.output)
        sys.stderr.write(render_report(report))
    else:
        text = render_report(report)
        if res.feasible:
            text += "".join(f"witness.{n} = {_fmt(v)}\n" for n, v in zip(lp.variable_names, res.witness))
        _emit(text, args.output)
    return EXIT_INFEASIBLE if res.status == INFEASIBLE else EXIT_OK


def cmd_mumax(args) -> int:
    _, build = _builder(args)
    if args.dump_lp:
        Path(args.dump_lp).write_text(format_tableau(build(args.mu if args.mu is not None else 0.0)))
    try:
        res = mu_max(build, tol=args.tol)
    except NoFiniteBracketError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    report = {"status": res.status, "mu_max": res.mu_max, "bracket_lo": res.bracket[0],
              "bracket_hi": res.bracket[1], "iterations": res.iterations}
    _emit(render_report(report, args.format), args.output)
    if args.profile:
        hi = 2.0 * res.bracket[1] if res.bracket[1] > 0 else 1.0
        mus = np.linspace(0.0, hi, args.profile_points)
        prof = feasibility_profile(build, mus, workers=args.workers)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mu", "status"])
        for m, s in zip(prof.mus, prof.statuses):
            w.writerow([_fmt(m), s])
        Path(args.profile).write_text(buf.getvalue())
    if res.status == BASAL_INADMISSIBLE:
        sys.stderr.write("basal composition inadmissible: infeasible already at mu = 0\n")
        return EXIT_INFEASIBLE
    return EXIT_OK


def _toy(args):
    prob = load_toy_problem(resolve_path(args.model))
    return prob.with_horizon(args.t_end, args.grid_n)


def cmd_simulate(args) -> int:
    prob = _toy(args)
    if args.control:
        u = control_from_dict(read_document(resolve_path(args.control)), prob.t_end)
    elif args.alpha is not None:
        u = ControlSignal.constant(args.alpha, prob.t_end)
    elif prob.control is not None:
        u = prob.control
    else:
        raise UsageError("simulate needs --control, --alpha, or a [control] section in the model")
    dt = args.dt_max or prob.dt_max or 1e-3
    try:
        traj = integrate(prob.x0, u, prob.params, t_end=min(prob.t_end, u.t_end), dt_max=dt)
    except NegativityGuardError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    _emit(traj.to_csv(), args.output)
    s = traj.final_state
    report = {"status": "ok", "cost": float(traj.cost_running[-1]), "e_final": s.e, "m_final": s.m}
    (sys.stderr if not args.output else sys.stdout).write(render_report(report))
    return EXIT_OK


def cmd_optimize(args) -> int:
    prob = _toy(args)
    p = prob.params
    if p.smoothing <= 0:
        raise UsageError("optimize needs smoothing > 0 (the exact min is not differentiable)")
    try:
        res = sweep(prob.x0, p, prob.t_end, prob.grid_n, relax=args.relax, tol=args.tol,
                    max_iter=args.max_iter, dt_max=args.dt_max or prob.dt_max)
    except NegativityGuardError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    gap = maximum_condition_gap(res, p)
    scale = 1.0 + np.abs(res.hamiltonian)
    report = {"status": "ok", "cost": res.cost, "iterations": res.iterations, "converged": res.converged,
              "singular_fraction": res.singular_fraction}
    try:
        env = envelope_check(res, p)
        report.update(manifold_residual=env.manifold_residual, alpha_avg=env.alpha_avg, alpha_ss=env.alpha_ss)
    except (SteadyStateError, ValueError) as exc:
        report.update(manifold_residual=float("nan"), alpha_avg=float("nan"), alpha_ss=float("nan"))
        sys.stderr.write(f"envelope check skipped: {exc}\n")
    vals = res.control.values
    switches = np.flatnonzero(np.abs(np.diff(vals)) > 1e-6)
    report.update(alpha_initial=float(vals[0]),
                  first_switch=float(res.control.grid[switches[0] + 1]) if switches.size else float("nan"),
                  max_condition_ok=bool(np.all(gap >= -1e-6 * scale)),
                  max_condition_gap=float(np.min(gap / scale)))
    if res.message:
        report["message"] = res.message
    if args.output:
        Path(args.output).write_text(res.to_csv(p))
    text = render_report(report, args.format)
    if args.report:
        Path(args.report).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_gen_random_model(args) -> int:
    doc = random_model_document(args.seed, admissible=not args.inadmissible)
    out = args.output
    if out and Path(out).suffix in (".yaml", ".yml"):
        text = yaml.safe_dump(doc, sort_keys=False)
    elif out and Path(out).suffix not in ("", ".json"):
        raise UsageError("random models are written as .json or .yaml")
    else:
        text = json.dumps(doc, indent=1) + "\n"
    _emit(text, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rbadyn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, model_help):
        sp.add_argument("--model", required=True, help=model_help)
        sp.add_argument("--output", help="write the main output here instead of stdout")
        sp.add_argument("--format", choices=("text", "csv"), default="text")

    def lp_flags(sp):
        common(sp, "model file, or the name of a shipped model (toy_prokaryote, toy_eukaryote)")
        sp.add_argument("--turnover", help="turnover file (or shipped name)")
        sp.add_argument("--eukaryote", action="store_true", help="use the model's compartment section")
        sp.add_argument("--mu", type=float)
        sp.add_argument("--dump-lp", metavar="PATH", help="write the assembled LP as text")

    sp = sub.add_parser("feasible", help="solve the feasibility LP at one growth rate")
    lp_flags(sp)
    sp.set_defaults(func=cmd_feasible)

    sp = sub.add_parser("mumax", help="maximal feasible growth rate by bisection")
    lp_flags(sp)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--profile", metavar="PATH", help="write a mu,status feasibility profile CSV")
    sp.add_argument("--profile-points", type=int, default=41)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_mumax)

    def toy_flags(sp):
        common(sp, "toy problem file, or a shipped name (toy_smooth, toy_dilution, ...)")
        sp.add_argument("--t-end", type=float)
        sp.add_argument("--grid-n", type=int)
        sp.add_argument("--dt-max", type=float)

    sp = sub.add_parser("simulate", help="integrate the toy model under a given control")
    toy_flags(sp)
    sp.add_argument("--control", help="control file with 'constant' or 'grid' + 'values'")
    sp.add_argument("--alpha", type=float, help="constant control value")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("optimize", help="forward-backward sweep for the optimal allocation")
    toy_flags(sp)
    sp.add_argument("--relax", type=float, default=0.5)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=200)
    sp.add_argument("--report", metavar="PATH", help="also write the report block here")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("gen-random-model", help="write a seeded random small model (.json or .yaml)")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--inadmissible", action="store_true", help="violate a density cap at mu = 0")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_gen_random_model)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"rbadyn: error: {exc}\n")
        return EXIT_ERROR
    except (FileNotFoundError, IsADirectoryError, PermissionError, ModelError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    except IterationLimitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
