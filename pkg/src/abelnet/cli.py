"""Command line: ``abelnet {run,check,solve,aggregate}``.

Exit codes: 0 success / halted / optimal, 1 usage, I/O or parse error,
2 non-halting or infeasible, 3 budget exhausted or unknown, 4 check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .aggregate import GridTooSmall, rotor_aggregation
from .core import AbelnetError
from .engine import (
    Halted,
    NonHalting,
    parse_policy,
    replay_certificate,
    run,
    run_all_schedulers,
    run_parallel,
    trace_records,
)
from .formats import FormatError, parse_network, parse_program, thaw
from .optimize import MonotoneProgram, solve_monotone, solve_toppling_ip
from .verify import check_abelian

EXIT_OK, EXIT_ERROR, EXIT_NONHALT, EXIT_BUDGET, EXIT_CHECK = 0, 1, 2, 3, 4


def _label(letter) -> str:
    return f"{letter.vertex}:{letter.symbol}"


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return repr(value)


def _emit(report: dict, as_json: bool, out):
    if as_json:
        json.dump(_jsonable(report), out, indent=2)
        out.write("\n")
        return
    for key, value in report.items():
        if isinstance(value, dict):
            out.write(f"{key}:\n")
            for k, v in value.items():
                out.write(f"  {k} = {thaw(v)}\n")
        else:
            out.write(f"{key}: {thaw(value)}\n")


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_run(args, out) -> int:
    doc = parse_network(_read(args.file))
    net, x, q = doc.bundle()
    if args.parallel:
        outcome = run_parallel(net, x, q, args.parallel, args.seed, args.budget)
        if args.trace:
            outcome_traced = run(net, x, q, "fifo", args.budget, trace=True)
    else:
        outcome = run(net, x, q, args.scheduler, args.budget, trace=bool(args.trace))
        outcome_traced = outcome
    report = {"status": outcome.status}
    if isinstance(outcome, Halted):
        report["steps"] = outcome.steps
        report["odometer"] = {_label(a): c for a, c in net.as_dict(outcome.odometer).items()}
        report["final_states"] = {str(v): s for v, s in zip(net.vertices, outcome.final.states)}
        code = EXIT_OK
    elif isinstance(outcome, NonHalting):
        report["certificate"] = {
            "start_step": outcome.start_step,
            "segment": [_label(net.letters[i]) for i in outcome.segment],
            "counts": {_label(a): c for a, c in net.as_dict(outcome.config.counts).items()},
            "states": {str(v): s for v, s in zip(net.vertices, outcome.config.states)},
            "replays": replay_certificate(net, outcome),
        }
        code = EXIT_NONHALT
    else:
        report["steps"] = outcome.steps
        report["partial_odometer"] = {_label(a): c for a, c in net.as_dict(outcome.odometer).items()}
        code = EXIT_BUDGET
    if args.trace and isinstance(outcome_traced, Halted) and outcome_traced.trace is not None:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for rec in trace_records(net, net.configuration(x, q), outcome_traced.trace):
                fh.write(json.dumps(_jsonable(rec)) + "\n")
    _emit(report, args.json, out)
    return code


def cmd_check(args, out) -> int:
    doc = parse_network(_read(args.file))
    net, x, q = doc.bundle()
    failed = False
    vertices = {}
    for v, proc in zip(net.vertices, net.processors):
        rep = check_abelian(proc, trials=args.trials, seed=args.seed)
        failed |= not rep.passed
        vertices[str(v)] = rep.to_dict() if args.json else rep.describe()
    policies = ("fifo", "lifo", "rr", "greedy", f"random:{args.seed}")
    comp = run_all_schedulers(net, x, q, args.budget, policies)
    failed |= not comp.agree
    report = {
        "result": "FAIL" if failed else "PASS",
        "processors": vertices,
        "schedulers": comp.summary(),
    }
    _emit(report, args.json, out)
    return EXIT_CHECK if failed else EXIT_OK


def cmd_solve(args, out) -> int:
    prog = parse_program(_read(args.file))
    if isinstance(prog, MonotoneProgram):
        prog.check_monotone()
        sol = solve_monotone(prog, args.budget)
        report = {"status": sol.status, "steps": sol.steps, "minimizer": sol.u}
        if sol.u is not None:
            report["check"] = sol.check
            if sol.objective is not None:
                report["objective"] = sol.objective
        elif sol.status == "infeasible-in-box":
            report["certificate"] = {"escape": sol.certificate["escape"], "box": prog.box}
        code = {"optimal": EXIT_OK, "unknown": EXIT_BUDGET}.get(sol.status, EXIT_NONHALT)
    else:
        sol = solve_toppling_ip(prog, args.budget)
        report = {"status": sol.status, "steps": sol.steps, "topplings": sol.v}
        if sol.v is not None:
            report["check"] = sol.check
        code = {"optimal": EXIT_OK, "unknown": EXIT_BUDGET}.get(sol.status, EXIT_NONHALT)
    _emit(report, args.json, out)
    return code


def cmd_aggregate(args, out) -> int:
    try:
        agg = rotor_aggregation(args.n, args.radius, args.order, args.scheduler)
    except GridTooSmall as exc:
        out.write(f"error: {exc}\n")
        return EXIT_ERROR
    Path(args.output).write_text(agg.pgm(), encoding="ascii")
    report = {
        "visited": len(agg.visited),
        "outradius": round(agg.outradius, 6),
        "inradius": round(agg.inradius, 6),
        "ratio": round(agg.ratio(), 6) if agg.visited else None,
        "steps": agg.steps,
        "legend": agg.legend(),
        "output": args.output,
    }
    _emit(report, args.json, out)
    return EXIT_OK


def _scheduler(text: str) -> str:
    try:
        parse_policy(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abelnet", description="Run, check and solve with abelian networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=100_000):
        p.add_argument("--budget", type=int, default=budget, help="maximum number of letters processed")
        p.add_argument("--json", action="store_true", help="machine-readable report")

    p = sub.add_parser("run", help="run a network file to completion")
    p.add_argument("file")
    p.add_argument("--scheduler", type=_scheduler, default="fifo", help="fifo|lifo|rr|greedy|random:SEED")
    p.add_argument("--trace", metavar="PATH", help="write newline-delimited step records")
    p.add_argument("--parallel", type=int, default=0, metavar="K", help="run with K worker threads")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="check abelianness and scheduler invariance")
    p.add_argument("file")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve a monotone or toppling program file")
    p.add_argument("file")
    common(p, budget=1_000_000)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("aggregate", help="rotor aggregation on Z^2, written as a P2 graymap")
    p.add_argument("n", type=int)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--order", default="NESW", help="rotor order, a permutation of NESW")
    p.add_argument("--scheduler", type=_scheduler, default="fifo")
    p.add_argument("-o", "--output", default="aggregate.pgm")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_aggregate)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (OSError, FormatError, AbelnetError, ValueError) as exc:
        out.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
