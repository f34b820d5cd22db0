"""Command-line entry point.

    discwave run CONFIG
    discwave sweep CONFIG --axis p --values 1.5,2,2.5,3
    discwave lemmas [--max-d D] [--max-R R] [--seeds K] [--seed S]
    discwave lifespan CONFIG [--epsilons 0.1,0.01,0.001]
    discwave count --d D --R R

Outputs go to --output-dir if given, else to the config's output_dir below
$DISCWAVE_OUTPUT_ROOT (default: the working directory).

Exit status: 0 on success, 1 when a run, suite case or monitor fails,
2 for invalid input.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import (
    SWEEP_AXES,
    LifespanAborted,
    lifespan,
    parse_values,
    resolve_output_dir,
    run_experiment,
    sweep,
)
from .lattice import MAX_DIM, count_l1_ball, l1_ball_bound
from .suites import DEFAULT_MAX_R, DEFAULT_SEEDS, convex_suite, counting_suite, format_table

log = logging.getLogger("discwave")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _print(args, *parts) -> None:
    if not args.quiet:
        print(*parts)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = resolve_output_dir(cfg, args.output_dir)
    outcome = run_experiment(cfg, out)
    s = outcome.summary
    where = f" at N_b={s['N_b']}, i_b={tuple(s['i_b'])}" if s["N_b"] is not None else f" at n={s['n']}"
    _print(args, f"{s['status']}{where} after {s['steps']} steps")
    if not outcome.report.hypotheses.applicable:
        _print(args, "blow-up theorem not applicable: " + "; ".join(outcome.report.hypotheses.reasons()))
    if s["monitor_failures"]:
        print(f"monitor failures: {', '.join(s['monitor_failures'])}", file=sys.stderr)
    _print(args, f"wrote {out}")
    return EXIT_FAIL if s["monitor_failures"] else EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = parse_values(args.values)
    out = resolve_output_dir(cfg, args.output_dir)
    result = sweep(cfg, args.axis, values, out, args.workers)
    for r in result.rows:
        state = r["error"] or (f"{r['status']} N_b={r['N_b']}" if r["N_b"] is not None else r["status"])
        _print(args, f"{args.axis}={r['value']}: {state}")
    _print(args, f"wrote {out / 'summary.csv'}")
    if result.all_failed:
        print("every run in the sweep failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_lemmas(args) -> int:
    rows = counting_suite(args.max_d, args.max_R) + convex_suite(args.seeds, args.seed)
    _print(args, format_table(rows))
    failed = [r for r in rows if r.failed]
    for r in failed:
        print(f"FAILED: {r.suite} / {r.case}: {r.detail}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_lifespan(args) -> int:
    cfg = load_config(args.config)
    epsilons = [float(v) for v in parse_values(args.epsilons)]
    out = resolve_output_dir(cfg, args.output_dir)
    try:
        res = lifespan(cfg, epsilons, out, args.workers)
    except LifespanAborted as exc:
        print(f"lifespan fit aborted: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for eps, nb in res.runs:
        _print(args, f"epsilon={eps:g}: N_b={nb}")
    _print(args, f"slope={res.fit.slope:.6f} intercept={res.fit.intercept:.6f} residual={res.fit.residual:.3g}")
    if res.reference is not None:
        verdict = "within" if res.within_tolerance else "outside"
        _print(args, f"reference slope {res.reference:g}: {verdict} 30% tolerance")
        if not res.within_tolerance:
            log.warning("fitted slope %.4f is outside 30%% of %g", res.fit.slope, res.reference)
    _print(args, f"wrote {out / 'lifespan.json'}")
    return EXIT_OK


def cmd_count(args) -> int:
    count = count_l1_ball(args.d, args.R)
    print(f"count={count}")
    if args.R >= 1:
        bound = l1_ball_bound(args.d, args.R)
        print(f"bound={bound}")
        print("holds" if count <= bound else "VIOLATED")
        return EXIT_OK if count <= bound else EXIT_FAIL
    print("bound=n/a (needs R >= 1)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log progress")
    common.add_argument("--output-dir", type=Path, default=None,
                        help="write artifacts here instead of the config's output_dir")

    parser = argparse.ArgumentParser(prog="discwave", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="simulate one configuration")
    p.add_argument("config", type=Path)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="one run per value of a parameter")
    p.add_argument("config", type=Path)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--workers", type=int, default=None, help="parallel runs (default: CPU count)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lemmas", parents=[common], help="run the counting and convex-sequence oracle suites")
    p.add_argument("--max-d", type=int, default=MAX_DIM)
    p.add_argument("--max-R", type=int, default=DEFAULT_MAX_R)
    p.add_argument("--seeds", type=int, default=DEFAULT_SEEDS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser("lifespan", parents=[common], help="fit log N_b against log epsilon")
    p.add_argument("config", type=Path)
    p.add_argument("--epsilons", default="0.1,0.01,0.001", help="comma-separated list")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_lifespan)

    p = sub.add_parser("count", parents=[common], help="lattice points in an L1 ball and their upper bound")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--R", type=int, required=True)
    p.set_defaults(func=cmd_count)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.ERROR if args.quiet else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
