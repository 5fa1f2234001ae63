"""Command line entry point: ``toflab run|bound|sweep|table1|locate``.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from ..analysis import FormulaTerms, worst_case_bound
from ..errors import ToflabError
from ..geometry import SPEED_OF_LIGHT, PropagationConstants, Role, distance
from ..locate import end_to_end
from ..protocols import Method
from ..timebase import PpmDrift
from .csvio import emit_csv
from .montecarlo import RNG_ALGORITHM, drift_assignment, run_monte_carlo, trial_rng, with_drifts
from .scenario import load_scenario
from .sweep import SWEEPABLE, sweep
from .table1 import ROWS, format_table, reproduce_table1

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


def _terms(args) -> FormulaTerms:
    return FormulaTerms(
        t1=args.t1,
        d_a=args.d_a,
        d_b=args.d_b,
        d_ab=args.d_ab_ns * 1e-9,
        tdoa=args.tdoa_ns * 1e-9,
        pulse_gap=args.pulse_gap,
    )


def _add_term_flags(p: argparse.ArgumentParser, c_default: float) -> None:
    p.add_argument("--t1", type=float, default=1.0, help="seconds since last sync")
    p.add_argument("--d-a", type=float, default=1e-3, help="reply delay D_A [s]")
    p.add_argument("--d-b", type=float, default=1e-3, help="reply delay D_B [s]")
    p.add_argument("--d-ab-ns", type=float, default=100.0, help="d_AB [ns]")
    p.add_argument("--tdoa-ns", type=float, default=0.0, help="true TDoA [ns]")
    p.add_argument("--pulse-gap", type=float, default=5e-3, help="DP-Whistle pulse gap [s]")
    p.add_argument("--eps-ppm", type=float, default=20.0, help="max |drift| [ppm]")
    p.add_argument("--c", type=float, default=c_default, help="propagation speed [m/s]")


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    records = run_monte_carlo(scenario)
    comment = f"toflab run; rng={RNG_ALGORITHM}; seed={scenario.seed}"
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            emit_csv(records, fh, scenario.node_ids, comment)
    else:
        emit_csv(records, sys.stdout, scenario.node_ids, comment)
    return EXIT_OK


def cmd_bound(args) -> int:
    method = Method(args.method)
    bound = worst_case_bound(
        method, _terms(args), PpmDrift.from_ppm(args.eps_ppm), PropagationConstants(args.c)
    )
    out = {
        "method": method.value,
        "formula": ROWS[method][1],
        "worst_error_s": bound.worst_error_s,
        "worst_error_m": bound.worst_error_m,
        "slack_m": bound.slack_m,
        "corner_ppm": {s: d.ppm for s, d in bound.corner.items()},
    }
    print(json.dumps(out, indent=2, ensure_ascii=False))
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.steps < 1:
        raise ValueError("--steps must be at least 1")
    if args.log:
        values = np.geomspace(args.start, args.stop, args.steps)
    else:
        values = np.linspace(args.start, args.stop, args.steps)
    points = sweep(
        Method(args.method),
        args.param,
        values,
        _terms(args),
        PpmDrift.from_ppm(args.eps_ppm),
        PropagationConstants(args.c),
        draws=args.draws,
        seed=args.seed,
    )
    writer = csv.writer(sys.stdout)
    writer.writerow([args.param, "bound_m", "corner_max_m", "random_max_m"])
    for p in points:
        writer.writerow([repr(p.value), repr(p.bound_m), repr(p.corner_max_m), repr(p.random_max_m)])
    return EXIT_OK


def cmd_table1(args) -> int:
    rows = reproduce_table1(
        d_a=args.d_a,
        d_b=args.d_b,
        t1=args.t1,
        d_ab=args.d_ab_ns * 1e-9,
        eps_max=PpmDrift.from_ppm(args.eps_ppm),
        c=args.c,
    )
    print(format_table(rows, latex=args.latex))
    return EXIT_OK


def cmd_locate(args) -> int:
    scenario = load_scenario(args.scenario)
    rng = trial_rng(scenario.seed, args.trial)
    nodes = with_drifts(scenario.nodes, drift_assignment(scenario, args.trial, rng))
    method = Method(args.method) if args.method else scenario.method
    fix = end_to_end(nodes, method, scenario.schedule, scenario.constants, rng)
    tag = next(n for n in nodes if n.role is Role.TAG)
    out = {
        "method": method.value,
        "position": [fix.position.x, fix.position.y],
        "true_position": [tag.position.x, tag.position.y],
        "position_error_m": distance(fix.position, tag.position),
        "residual_rms_m": fix.residual_rms_m,
        "iterations": fix.iterations,
        "converged": fix.converged,
        "ambiguous": fix.ambiguous,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toflab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    methods = [m.value for m in Method]

    p = sub.add_parser("run", help="run a scenario's Monte-Carlo trials, write CSV")
    p.add_argument("scenario")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bound", help="worst-case drift error of one method")
    p.add_argument("--method", required=True, choices=methods)
    _add_term_flags(p, SPEED_OF_LIGHT)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="sweep one parameter, CSV of bound vs evaluated error")
    p.add_argument("--method", required=True, choices=methods)
    p.add_argument("--param", required=True, choices=SWEEPABLE)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--log", action="store_true", help="geometric spacing")
    p.add_argument("--draws", type=int, default=0, help="random drift draws per point")
    p.add_argument("--seed", type=int, default=0)
    _add_term_flags(p, SPEED_OF_LIGHT)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table1", help="worst-case error table of all methods")
    _add_term_flags(p, 3e8)
    p.add_argument("--latex", action="store_true", help="print LaTeX formulas")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("locate", help="end-to-end position fix for a scenario")
    p.add_argument("scenario")
    p.add_argument("--method", choices=methods, help="override the scenario's method")
    p.add_argument("--trial", type=int, default=0, help="trial index for drift draw")
    p.set_defaults(func=cmd_locate)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here 2 means I/O
        return EXIT_VALIDATION if exc.code == 2 else int(exc.code or 0)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"toflab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ToflabError, ValueError) as exc:
        print(f"toflab: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
