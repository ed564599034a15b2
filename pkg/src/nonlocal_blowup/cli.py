"""
Command-line front end.

    nonlocal-blowup [--out DIR] [--workers N] [--plots] <command> ...

Commands print one JSON document on stdout. Exit codes: 0 success or
agreement, 1 verification failure or disagreement, 2 invalid input,
3 inconclusive run.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

from .config import config_hash, load_config
from .errors import NonlocalBlowupError, PreconditionError
from .grid import make_grid, write_field_csv
from .integrate import INCONCLUSIVE, solve, write_summary_json, write_trajectory_csv
from .regularize import EpsilonSchedule, maximal_solution
from .sweep import disagreements, parse_sweep, run_sweep
from .theory import Regime, build_supersolution, check_supersub, classify_regime, ode_blowup_time

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3

log = logging.getLogger("nonlocal_blowup.cli")


def _emit(data):
    json.dump(data, sys.stdout, indent=2, sort_keys=True, default=_jsonable)
    sys.stdout.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj):
        return asdict(obj)
    return str(obj)


def _out(args, *parts):
    path = os.path.join(args.out, *parts)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    return path


def _write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _read_text(path):
    with open(path) as fh:
        return fh.read()


# --------------------------------------------------------------------------
# commands


def cmd_solve(args):
    problem, solver = load_config(args.config)
    result = solve(problem, solver)
    write_trajectory_csv(_out(args, "trajectory.csv"), result)
    write_summary_json(_out(args, "summary.json"), result)
    write_field_csv(_out(args, "final_field.csv"), result.final, result.grid)
    if args.plots:
        from .plotting import plot_field, plot_trajectory

        plot_trajectory(result, _out(args, "trajectory.png"))
        plot_field(result.grid, result.final, _out(args, "final_field.png"), f"t = {result.T_reached:.6g}")
    summary = result.summary()
    if result.message:
        summary["message"] = result.message
    _emit(summary)
    return EXIT_INCONCLUSIVE if result.status == INCONCLUSIVE else EXIT_OK


def cmd_sweep(args):
    spec = parse_sweep(_read_text(args.config))
    os.makedirs(args.out, exist_ok=True)
    rows = run_sweep(spec, out_dir=args.out, workers=args.workers)
    if args.plots:
        from .plotting import plot_phase_diagram

        names = [a for a, _ in spec.axes]
        x = names[0]
        y = names[1] if len(names) > 1 else names[0]
        plot_phase_diagram(rows, _out(args, "phase_diagram.png"), x=x, y=y)
    bad = disagreements(rows)
    _emit({
        "n_points": len(rows),
        "n_disagree": len(bad),
        "n_gap": sum(r["theory_label"] == Regime.THEORY_GAP.value for r in rows),
        "n_error": sum(r["numeric_status"] == "error" for r in rows),
        "table": os.path.join(args.out, "sweep.csv"),
        "rows": rows,
    })
    return EXIT_FAIL if bad else EXIT_OK


def cmd_verify_super(args):
    problem, solver = load_config(args.config)
    grid = make_grid(problem.domain, solver.n)
    T = solver.T_end
    sup = build_supersolution(problem, grid, T)
    times = np.linspace(0.0, T, args.samples)
    report = check_supersub(sup, problem, grid, times, kind="super", constants=asdict(sup.params))
    data = report.to_dict()
    data["config_hash"] = config_hash(problem, solver)
    _write_json(_out(args, "supersolution_report.json"), data)
    _emit(data)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_maximal(args):
    problem, solver = load_config(args.config)
    schedule = EpsilonSchedule(tuple(args.epsilons)) if args.epsilons else EpsilonSchedule()
    runs, report, limit = maximal_solution(problem, schedule, solver)
    data = report.to_dict()
    diffs = report.successive_sup_diffs
    data["diffs_decreasing"] = all(b < a for a, b in zip(diffs, diffs[1:]))
    data["statuses"] = [r.status for r in runs]
    data["config_hash"] = config_hash(problem, solver)
    _write_json(_out(args, "maximal_report.json"), data)
    write_field_csv(_out(args, "maximal_limit.csv"), limit, runs[-1].grid)
    if args.plots:
        from .plotting import plot_epsilon_family

        plot_epsilon_family(runs, schedule.epsilons, _out(args, "epsilon_family.png"))
    _emit(data)
    ok = report.n_violations == 0 and data["diffs_decreasing"]
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ode_time(args):
    t0 = ode_blowup_time(args.a, args.omega, args.b, args.rho, args.m, args.f0)
    _emit({"a": args.a, "omega": args.omega, "b": args.b, "rho": args.rho,
           "m": args.m, "f0": args.f0, "t0": t0, "blows_up": t0 is not None})
    return EXIT_OK


def _flag(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "positive"):
        return True
    if low in ("false", "no", "0", "zero"):
        return False
    try:
        return float(text) > 0
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected true/false or a number, got {text!r}") from None


def cmd_classify(args):
    label = classify_regime(args.p, args.q, args.l, args.m, args.kbar0)
    data = label.to_dict()
    data.update(p=args.p, q=args.q, l=args.l, m=args.m, kbar0_positive=args.kbar0)
    _emit(data)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _global_flags(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out", default=d("out"), help="output directory (default: ./out)")
    parser.add_argument("--workers", type=int, default=d(1), help="worker processes for sweeps")
    parser.add_argument("--seed", type=int, default=d(None), help="reserved; runs are deterministic")
    parser.add_argument("--plots", action="store_true", default=d(False),
                        help="also render PNG figures next to the CSV/JSON outputs")
    parser.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser():
    parser = argparse.ArgumentParser(prog="nonlocal-blowup", description=__doc__.split("\n\n")[0].strip())
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("solve", cmd_solve, "integrate one configuration")
    p.add_argument("config")
    p = add("sweep", cmd_sweep, "run a parameter sweep and compare with the theorems")
    p.add_argument("config")
    p = add("verify-super", cmd_verify_super, "build and check the explicit supersolution")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=20, help="number of sample times in [0, T_end]")
    p = add("maximal", cmd_maximal, "epsilon-regularised family and its monotone limit")
    p.add_argument("config")
    p.add_argument("--epsilons", type=float, nargs="+", help="strictly decreasing values in (0, 1)")
    p = add("ode-time", cmd_ode_time, "blow-up time of the spatially constant ODE")
    for flag in ("a", "omega", "b", "rho", "m", "f0"):
        p.add_argument(f"--{flag}", type=float, required=True)
    p = add("classify", cmd_classify, "theory label for exponents p q l m")
    for name in ("p", "q", "l", "m"):
        p.add_argument(name, type=float)
    p.add_argument("kbar0", type=_flag, nargs="?", default=True,
                   help="whether the kernel lower profile is positive at t=0 (default true)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    if getattr(args, "samples", 2) < 2:
        print("error: --samples must be >= 2", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: precondition not met: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NonlocalBlowupError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
