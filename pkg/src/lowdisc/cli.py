"""Command line front end: ``lowdisc generate | evaluate | optimize | reproduce``.

Exit codes: 0 success, 2 usage error, 3 Linf budget exceeded, 4 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .core import DiscrepancyError, DiscrepancyKind, dumps_point_set, format_float, load_point_set, save_point_set
from .experiments import ALIASES, REPRODUCIBLE, jobs_from_env, reproduce
from .generators import (
    GOLDEN_RATIO,
    RANDOM_GENERATOR,
    SobolParams,
    default_sobol_table,
    fibonacci_integration_lattice,
    fibonacci_set,
    kronecker_lattice,
    load_sobol_table,
    random_set,
    sobol_set,
)
from .l2 import l2_squared
from .linf import DEFAULT_BUDGET, BudgetExceeded, GridSlice, linf_star_2d, linf_star_search
from .optimizer import AdamConfig, NonFiniteGradient, Track, default_alpha, optimize, optimize_with_restarts

EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4

log = logging.getLogger("lowdisc")


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _kind(text: str) -> DiscrepancyKind:
    try:
        return DiscrepancyKind.parse(text)
    except DiscrepancyError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sidecar(path: str) -> Path:
    return Path(str(path) + ".json")


def _write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# --- generate -------------------------------------------------------------


def cmd_generate(args) -> int:
    meta = {"generator": args.generator, "n": args.n}
    if args.generator == "fibonacci":
        ps = fibonacci_set(args.n)
        meta["alpha"] = GOLDEN_RATIO
    elif args.generator == "lattice":
        alpha = math.sqrt(2.0) if args.alpha is None else args.alpha
        ps = kronecker_lattice(args.n, alpha)
        meta["alpha"] = alpha
    elif args.generator == "fibonacci-lattice":
        if args.k is None:
            raise UsageError("fibonacci-lattice needs --k")
        ps = fibonacci_integration_lattice(args.k)
        meta.update(k=args.k, n=ps.n)
    elif args.generator == "sobol":
        table = load_sobol_table(args.direction_numbers) if args.direction_numbers else default_sobol_table()
        ps = sobol_set(args.n, SobolParams(args.d, args.skip, table))
        meta.update(d=args.d, skip=args.skip, direction_numbers=table.name)
    else:
        ps = random_set(args.n, args.d, args.seed)
        meta.update(d=args.d, seed=args.seed, rng=RANDOM_GENERATOR)
    meta["d"] = ps.d
    # provenance goes to the sidecar so the set file is bare rows
    if args.output:
        save_point_set(ps, args.output)
        _write_json(_sidecar(args.output), meta)
    else:
        sys.stdout.write(dumps_point_set(ps))
    return 0


# --- evaluate -------------------------------------------------------------


def evaluate_report(
    ps, kind: DiscrepancyKind, budget: int = DEFAULT_BUDGET, prune: bool = True, planar: bool = True
) -> dict:
    start = time.perf_counter()
    doc = {"kind": kind.value, "n": ps.n, "d": ps.d}
    if kind.is_l2:
        value = l2_squared(ps, kind)
        doc.update(squared=value.squared, root=value.root)
        doc["summation"] = "compensated"
    elif ps.d == 2 and planar:
        # the sweep scores every grid corner
        doc["value"] = linf_star_2d(ps)
        doc.update(boxes_visited=GridSlice.from_points(ps.coords).boxes, pruned_fraction=0.0, method="planar-sweep")
    else:
        result = linf_star_search(ps, budget, prune)
        doc.update(value=result.value, boxes_visited=result.boxes_visited, pruned_fraction=result.pruned_fraction)
        doc["method"] = "grid-branch-and-bound"
    doc["runtime_ms"] = (time.perf_counter() - start) * 1e3
    return doc


def cmd_evaluate(args) -> int:
    ps = load_point_set(args.input)
    kinds = args.kind or [DiscrepancyKind.L2_STAR]
    for kind in kinds:
        doc = evaluate_report(ps, kind, args.budget, not args.no_prune, not args.exact)
        print(json.dumps(doc))
    return 0


# --- optimize -------------------------------------------------------------


def cmd_optimize(args) -> int:
    ps = load_point_set(args.input)
    if not args.kind.is_l2:
        raise UsageError(f"cannot optimize {args.kind}; pick an L2 kind")
    alpha = default_alpha(ps.n) if args.alpha is None else args.alpha
    cfg = AdamConfig(alpha=alpha, beta1=args.beta1, beta2=args.beta2, epsilon=args.epsilon, steps=args.steps, tau=args.tau)
    track = Track(every=args.track_every, budget=args.budget) if args.track_linf else None

    if args.restarts:
        result = optimize_with_restarts(ps, args.kind, cfg, args.restarts, args.restart_fraction, args.seed, track)
        final = result.best_set
        report = next((r for r in result.runs if r.final_set == final), result.runs[-1])
    else:
        report = optimize(ps, args.kind, cfg, track)
        final = report.final_set
        result = None

    out = Path(args.output) if args.output else Path(args.input).with_suffix(".opt.txt")
    save_point_set(final, out, [f"optimized {args.kind.value} steps={cfg.steps} alpha={cfg.alpha}"])
    traj_path = Path(args.trajectory) if args.trajectory else out.with_suffix(".trajectory.csv")
    tracked = dict(report.tracked)
    with open(traj_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "loss_squared", "loss_root", "tracked_metric"])
        for t, loss in enumerate(report.trajectory):
            metric = tracked.get(t)
            writer.writerow(
                [t, format_float(loss), format_float(math.sqrt(max(loss, 0.0))), "" if metric is None else format_float(metric)]
            )

    meta = {
        "input": str(args.input),
        "output": str(out),
        "trajectory": str(traj_path),
        "kind": args.kind.value,
        "config": {
            "alpha": cfg.alpha,
            "beta1": cfg.beta1,
            "beta2": cfg.beta2,
            "epsilon": cfg.epsilon,
            "steps": cfg.steps,
            "tau": cfg.tau,
        },
        "seed": args.seed,
        "restarts": args.restarts,
        "restart_fraction": args.restart_fraction,
        "clamp_events": report.clamp_events,
        "wall_ms": report.wall_ms,
        "initial": {"squared": report.initial_exact, "root": report.initial_root},
        "final": {"squared": report.final_exact, "root": report.final_root},
        "aborted": report.aborted,
    }
    if result is not None:
        exact = l2_squared(final, args.kind)
        meta["final"] = {"squared": exact.squared, "root": exact.root}
        meta["before_restart_roots"] = [math.sqrt(max(v, 0.0)) for v in result.before_restart]
    if track is not None:
        meta["tracking"] = {
            "metric": track.metric.value,
            "every": track.interval(ps.d),
            "best_iteration": report.best_iteration,
            "best_value": report.best_value,
            "final_value": report.final_metric,
        }
        best_path = out.with_suffix(".best.txt")
        save_point_set(report.best_set, best_path, [f"best linf iterate {report.best_iteration}"])
        meta["tracking"]["best_set"] = str(best_path)
    meta_path = Path(args.metadata) if args.metadata else _sidecar(str(out))
    _write_json(meta_path, meta)
    print(json.dumps({"output": str(out), "initial_root": report.initial_root, "final_root": meta["final"]["root"],
                      "aborted": report.aborted}))
    return EXIT_NUMERIC if report.aborted else 0


# --- reproduce ------------------------------------------------------------


def cmd_reproduce(args) -> int:
    options = {"jobs": args.jobs}
    if args.full:
        options["full"] = True
    if args.n:
        options["ns"] = args.n
    if args.sets is not None:
        options["sets"] = args.sets
    if args.restarts is not None:
        options["restarts"] = args.restarts
    if args.init_file:
        options["init_files"] = args.init_file
    if args.budget != DEFAULT_BUDGET:
        options["budget"] = args.budget
    result = reproduce(args.id, **options)
    for path in result.write(args.out):
        log.info("wrote %s", path)
    for line in result.summary_lines():
        print(line)
    print(f"{result.name}: {'PASS' if result.passed else 'FAIL'} ({len(result.checks)} checks) -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lowdisc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an initial point set")
    g.add_argument("generator", choices=["fibonacci", "lattice", "fibonacci-lattice", "sobol", "random"])
    g.add_argument("--n", type=_positive_int, default=1)
    g.add_argument("--d", type=_positive_int, default=2)
    g.add_argument("--alpha", type=float, help="lattice slope (default sqrt(2))")
    g.add_argument("--k", type=int, help="Fibonacci index for fibonacci-lattice")
    g.add_argument("--skip", type=int, default=0, help="leading Sobol' points to drop")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--direction-numbers", help="Joe-Kuo format file overriding the built-in table")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", help="print discrepancy reports as JSON lines")
    e.add_argument("input")
    e.add_argument("--kind", type=_kind, action="append", help="repeatable; default l2-star")
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max grid boxes for exact Linf")
    e.add_argument("--no-prune", action="store_true", help="disable branch-and-bound pruning")
    e.add_argument("--exact", action="store_true", help="use the general enumerator even in 2-D")
    e.set_defaults(func=cmd_evaluate)

    o = sub.add_parser("optimize", help="projected ADAM descent on a smoothed L2 loss")
    o.add_argument("input")
    o.add_argument("--kind", type=_kind, default=DiscrepancyKind.L2_STAR)
    o.add_argument("--steps", type=_positive_int, default=200)
    o.add_argument("--alpha", type=float, help="learning rate (default 5e-4 if n < 100 else 1e-4)")
    o.add_argument("--beta1", type=float, default=0.9)
    o.add_argument("--beta2", type=float, default=0.999)
    o.add_argument("--epsilon", type=float, default=1e-8)
    o.add_argument("--tau", type=float, default=1e-15)
    o.add_argument("--track-linf", action="store_true", help="keep the iterate with the lowest Linf")
    o.add_argument("--track-every", type=_positive_int)
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    o.add_argument("--restarts", type=int, default=0)
    o.add_argument("--restart-fraction", type=float, default=0.1)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("-o", "--output")
    o.add_argument("--trajectory")
    o.add_argument("--metadata")
    o.set_defaults(func=cmd_optimize)

    r = sub.add_parser("reproduce", help="rebuild a published table or figure as CSV")
    r.add_argument("id", choices=sorted(REPRODUCIBLE) + sorted(ALIASES))
    r.add_argument("--out", default="results")
    r.add_argument("--full", action="store_true", help="long-running full sweeps")
    r.add_argument("--n", type=_positive_int, action="append")
    r.add_argument("--sets", type=_positive_int)
    r.add_argument("--restarts", type=_positive_int)
    r.add_argument("--init-file", action="append", help="initial sets for the L2-subset columns")
    r.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    r.add_argument("--jobs", type=_positive_int, default=jobs_from_env())
    r.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"lowdisc: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NonFiniteGradient as exc:
        print(f"lowdisc: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, DiscrepancyError, ValueError, OSError) as exc:
        print(f"lowdisc: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
