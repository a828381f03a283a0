"""Experiment harness: rebuilds the published tables and figures as CSV data.

Every table function returns a :class:`TableResult` holding a wide table
(rows and columns laid out like the published one) and a list of
:class:`Check` records comparing computed cells with the quoted values.
Cells quoted from other methods carry ``source="paper"``; cells this package
computes carry ``source="computed"``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import reference as ref
from .core import DiscrepancyKind, PointSet, format_float, load_point_set
from .generators import SobolParams, fibonacci_set, kronecker_lattice, random_set, sobol_set
from .l2 import l2_squared
from .linf import DEFAULT_BUDGET, BudgetExceeded, linf_star
from .optimizer import AdamConfig, OptimizeReport, Track, default_alpha, optimize, optimize_with_restarts

logger = logging.getLogger(__name__)

THREADS_ENV = "LOWDISC_THREADS"
SOBOL_REL_TOL = 0.10

L2_STAR = DiscrepancyKind.L2_STAR
PERIODIC = DiscrepancyKind.L2_PERIODIC
EXTREME = DiscrepancyKind.L2_EXTREME


@dataclass
class Check:
    row: str
    column: str
    computed: Optional[float]
    paper: float
    mode: str  # "abs", "rel", "upper" (not worse than paper by more than tol), "baseline"
    tol: float
    status: str = ""
    note: str = ""

    def __post_init__(self):
        if not self.status:
            self.status = self.evaluate()

    def evaluate(self) -> str:
        if self.computed is None:
            return "skipped"
        if self.mode == "abs":
            ok = abs(self.computed - self.paper) <= self.tol
        elif self.mode == "upper":
            ok = self.computed <= self.paper * (1 + self.tol)
        else:
            ok = abs(self.computed - self.paper) <= self.tol * abs(self.paper)
        if ok:
            return "pass"
        # Sobol' cells use a different direction-number table than the paper
        return "deviation" if self.mode == "baseline" else "fail"


@dataclass
class TableResult:
    name: str
    columns: list[str]
    rows: list[dict]
    checks: list[Check] = field(default_factory=list)
    sources: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status in ("pass", "skipped", "deviation") for c in self.checks)

    def wide_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = [c if self.sources.get(c, "computed") == "computed" else f"{c} [paper]" for c in self.columns]
        writer.writerow(header)
        for row in self.rows:
            # absent keys are not applicable; an explicit None is a skipped cell
            writer.writerow([_cell(row[c]) if c in row else "" for c in self.columns])
        return buf.getvalue()

    def check_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["row", "column", "computed", "paper", "mode", "tolerance", "status", "note"])
        for c in self.checks:
            writer.writerow(
                [c.row, c.column, _cell(c.computed), _cell(c.paper), c.mode, _cell(c.tol), c.status, c.note]
            )
        return buf.getvalue()

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            got = "-" if c.computed is None else f"{c.computed:.6g}"
            lines.append(f"[{c.status:>9}] {self.name} {c.row} {c.column}: computed {got}, paper {c.paper:.6g}")
        return lines

    def write(self, outdir: str) -> list[str]:
        os.makedirs(outdir, exist_ok=True)
        paths = []
        for suffix, text in (("", self.wide_csv()), ("_check", self.check_csv())):
            path = os.path.join(outdir, f"{self.name}{suffix}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
            paths.append(path)
        return paths


def _cell(value) -> str:
    if value is None:
        return "skipped"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def jobs_from_env() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def linf_or_none(points, budget: int = DEFAULT_BUDGET) -> Optional[float]:
    try:
        return linf_star(points, budget)
    except BudgetExceeded as exc:
        logger.info("skipping exact Linf: %s", exc)
        return None


def descend(points, kind=L2_STAR, steps: int = 200, alpha: Optional[float] = None, track: Optional[Track] = None) -> OptimizeReport:
    n = np.asarray(points).shape[0]
    cfg = AdamConfig(alpha=default_alpha(n) if alpha is None else alpha, steps=steps)
    return optimize(points, kind, cfg, track)


def sobol(n: int, d: int) -> PointSet:
    return sobol_set(n, SobolParams(d))


# --- Sobol' baseline ------------------------------------------------------


def _over_budget(n: int, d: int, budget: int) -> bool:
    return (n + 1) ** d > budget


def _higher_dim_cells(d: int, n: int, budget: int):
    if _over_budget(n, d, budget):
        return {f"d{d}/n{n}/linf_initial": None, f"d{d}/n{n}/linf_pgd": None}
    start = sobol(n, d)
    report = descend(start)
    return {
        f"d{d}/n{n}/linf_initial": linf_or_none(start, budget),
        f"d{d}/n{n}/linf_pgd": linf_or_none(report.final_set, budget),
    }


def _planar_l2_cells(kind: DiscrepancyKind, n: int):
    start = sobol(n, 2)
    report = descend(start, kind)
    tag = "periodic" if kind is PERIODIC else "extreme"
    return {f"{tag}/n{n}/initial": l2_squared(start, kind).root, f"{tag}/n{n}/pgd": report.final_root}


def sobol_cell_paper_values() -> dict:
    values = {}
    l2i, l2p, li, lp = ref.TABLE1["sobol"]
    values.update(
        {
            "table1/l2_initial": l2i,
            "table1/l2_pgd": l2p,
            "table1/linf_initial": li,
            "table1/linf_pgd": lp,
        }
    )
    for d, rows in ref.HIGHER_DIM_LINF.items():
        for n, (pgd, init, _, _) in rows.items():
            values[f"d{d}/n{n}/linf_initial"] = init
            values[f"d{d}/n{n}/linf_pgd"] = pgd
    for tag, table in (("periodic", ref.PERIODIC_2D), ("extreme", ref.EXTREME_2D)):
        for n, (pgd, _, _, init, _) in table.items():
            values[f"{tag}/n{n}/initial"] = init
            values[f"{tag}/n{n}/pgd"] = pgd
    return values


def compute_sobol_cells(keys: Optional[Iterable[str]] = None, budget: int = DEFAULT_BUDGET) -> dict:
    """Compute this implementation's value for Sobol'-seeded cells (all by default)."""
    wanted = set(sobol_cell_paper_values()) if keys is None else set(keys)
    out = {}
    if any(k.startswith("table1/") for k in wanted):
        start = sobol(260, 2)
        report = descend(start)
        out.update(
            {
                "table1/l2_initial": l2_squared(start, L2_STAR).root,
                "table1/l2_pgd": report.final_root,
                "table1/linf_initial": linf_star(start),
                "table1/linf_pgd": linf_star(report.final_set),
            }
        )
    for key in sorted(wanted):
        if key in out:
            continue
        head, ntag, _ = key.split("/")
        n = int(ntag[1:])
        if head.startswith("d"):
            out.update(_higher_dim_cells(int(head[1:]), n, budget))
        else:
            out.update(_planar_l2_cells(PERIODIC if head == "periodic" else EXTREME, n))
    return {k: v for k, v in out.items() if k in wanted}


def build_sobol_baseline(budget: int = DEFAULT_BUDGET) -> dict:
    """Baseline document committed as ``data/sobol_baseline.json``."""
    paper = sobol_cell_paper_values()
    computed = compute_sobol_cells(budget=budget)
    cells = {}
    for key in sorted(paper):
        value = computed.get(key)
        entry = {"value": value, "paper": paper[key]}
        if value is None:
            entry["status"] = "skipped"
            entry["note"] = "exact Linf grid exceeds the enumeration budget"
        else:
            dev = (value - paper[key]) / paper[key]
            entry["rel_deviation"] = dev
            if abs(dev) <= SOBOL_REL_TOL:
                entry["status"] = "within-10pct"
            else:
                entry["status"] = "deviation"
                entry["note"] = (
                    "paper used the GSL Sobol' generator; its direction numbers differ "
                    "from Joe-Kuo beyond the first two axes"
                    if not key.startswith(("table1", "periodic", "extreme"))
                    else "descent result differs from the quoted value"
                )
        cells[key] = entry
    return {
        "direction_numbers": "new-joe-kuo-6.1024",
        "optimizer": {"steps": 200, "alpha": "5e-4 if n < 100 else 1e-4", "tau": 1e-15},
        "budget": budget,
        "cells": cells,
    }


def _baseline_check(row: str, column: str, key: str, computed: Optional[float]) -> Check:
    entry = ref.sobol_baseline()["cells"].get(key, {})
    paper = sobol_cell_paper_values()[key]
    note = entry.get("note", "")
    committed = entry.get("value")
    if computed is not None and committed is not None and abs(computed - committed) > 1e-12:
        return Check(row, column, computed, paper, "baseline", SOBOL_REL_TOL, "fail", f"differs from committed baseline {committed!r}")
    return Check(row, column, computed, paper, "baseline", SOBOL_REL_TOL, note=note)


# --- tables ---------------------------------------------------------------


def table1(jobs: int = 1, **_) -> TableResult:
    columns = ["initialization", "l2_initial", "l2_pgd", "linf_initial", "linf_pgd"]
    starts = {
        "fibonacci": fibonacci_set(260),
        ref.SQRT2_LATTICE: kronecker_lattice(260, math.sqrt(2.0)),
        "sobol": sobol(260, 2),
    }
    reports = _map(descend, list(starts.values()), jobs)
    rows, checks = [], []
    for (name, start), report in zip(starts.items(), reports):
        row = {
            "initialization": name,
            "l2_initial": l2_squared(start, L2_STAR).root,
            "l2_pgd": report.final_root,
            "linf_initial": linf_star(start),
            "linf_pgd": linf_star(report.final_set),
        }
        rows.append(row)
        paper = dict(zip(columns[1:], ref.TABLE1[name]))
        if name == "sobol":
            for col in columns[1:]:
                checks.append(_baseline_check(name, col, f"table1/{col}", row[col]))
            continue
        checks.append(Check(name, "l2_initial", row["l2_initial"], paper["l2_initial"], "abs", 1e-6))
        checks.append(Check(name, "l2_pgd", row["l2_pgd"], paper["l2_pgd"], "upper", 0.03))
        # the published Linf values carry four significant digits
        checks.append(Check(name, "linf_initial", row["linf_initial"], paper["linf_initial"], "abs", 1e-5))
        checks.append(Check(name, "linf_pgd", row["linf_pgd"], paper["linf_pgd"], "upper", 0.14))
    return TableResult("table1", columns, rows, checks)


def _random_after(seed: int):
    report = descend(random_set(260, 2, seed))
    return report.final_root, linf_star(report.final_set)


def table2(sets: int = 200, initial_sets: int = 2000, seed: int = 0, jobs: int = 1, **_) -> TableResult:
    """Random starts: distribution of results after descent, plus initial statistics."""
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(max(sets, initial_sets), dtype=np.uint64)]
    initial = [l2_squared(random_set(260, 2, s), L2_STAR).root for s in seeds[:initial_sets]]
    after = _map(_random_after, seeds[:sets], jobs)
    columns = ["discrepancy", "median", "mean", "min", "max"]
    rows, checks = [], []
    for idx, name in enumerate(("l2-star", "linf-star")):
        vals = [a[idx] for a in after]
        stats = dict(zip(columns[1:], (statistics.median(vals), statistics.fmean(vals), min(vals), max(vals))))
        rows.append({"discrepancy": f"{name} after", **stats})
        # seeds are unknown, so only the mean and min magnitudes are compared
        for col, paper in zip(columns[1:], ref.TABLE2_AFTER[name]):
            if col in ("mean", "min"):
                checks.append(Check(f"{name} after", col, stats[col], paper, "rel", 0.10))
    rows.append({"discrepancy": "l2-star initial", "mean": statistics.fmean(initial), "min": min(initial),
                 "median": statistics.median(initial), "max": max(initial)})
    checks.append(Check("l2-star initial", "mean", statistics.fmean(initial), ref.RANDOM_INITIAL_L2_MEAN, "rel", 0.10))
    checks.append(Check("l2-star initial", "min", min(initial), ref.RANDOM_INITIAL_L2_MIN, "rel", 0.10))
    return TableResult("table2", columns, rows, checks)


def _compare_row(n: int):
    report = descend(fibonacci_set(n), track=Track(every=1))
    return report.final_metric, report.best_value, report.best_iteration


def table3(jobs: int = 1, **_) -> TableResult:
    """Planar Linf after descent from the Fibonacci set, against MPMC and NLP."""
    columns = ["n", "pgd_returned", "pgd_best", "best_iteration", "mpmc", "nlp"]
    ns = sorted(ref.COMPARE_LINF_2D)
    results = _map(_compare_row, ns, jobs)
    rows, checks = [], []
    for n, (returned, best, best_it) in zip(ns, results):
        p_ret, p_best, mpmc, nlp = ref.COMPARE_LINF_2D[n]
        rows.append({"n": n, "pgd_returned": returned, "pgd_best": best, "best_iteration": best_it, "mpmc": mpmc, "nlp": nlp})
        checks.append(Check(str(n), "pgd_returned", returned, p_ret, "rel", 0.10))
        checks.append(Check(str(n), "pgd_best", best, p_best, "rel", 0.10))
        if n != 20:
            checks.append(Check(str(n), "pgd_returned<mpmc", returned, mpmc, "upper", 0.0))
    return TableResult("table3", columns, rows, checks, {"mpmc": "paper", "nlp": "paper"})


def _higher_row(args):
    d, n, budget, init = args
    cells = {"sobol": None, "pgd_sobol": None}
    if _over_budget(n, d, budget) and init is None:
        return cells
    start = sobol(n, d)
    report = descend(start)
    cells["sobol"] = linf_or_none(start, budget)
    cells["pgd_sobol"] = linf_or_none(report.final_set, budget)
    if init is not None:
        cells["l2_subset_supplied"] = linf_or_none(init, budget)
        cells["pgd_l2_subset_supplied"] = linf_or_none(descend(init).final_set, budget)
    return cells


def higher_dim_table(d: int, budget: int = DEFAULT_BUDGET, init_files: Sequence[str] = (), jobs: int = 1, ns=None, **_) -> TableResult:
    """Linf in dimension ``d`` after descent from Sobol' (and optional user-supplied subset sets)."""
    quoted = ref.HIGHER_DIM_LINF[d]
    supplied = {}
    for path in init_files:
        ps = load_point_set(path)
        if ps.d == d:
            supplied[ps.n] = ps
    ns = sorted(quoted) if ns is None else sorted(ns)
    results = _map(_higher_row, [(d, n, budget, supplied.get(n)) for n in ns], jobs)
    columns = ["n", "pgd_sobol", "sobol", "pgd_l2_subset", "l2_subset", "pgd_l2_subset_supplied", "l2_subset_supplied"]
    rows, checks = [], []
    for n, cells in zip(ns, results):
        p_pgd, p_sob, p_pgd_sub, p_sub = quoted.get(n, (None,) * 4)
        rows.append({"n": n, "pgd_l2_subset": p_pgd_sub, "l2_subset": p_sub, **cells})
        if p_pgd is not None:
            checks.append(_baseline_check(str(n), "pgd_sobol", f"d{d}/n{n}/linf_pgd", cells["pgd_sobol"]))
            checks.append(_baseline_check(str(n), "sobol", f"d{d}/n{n}/linf_initial", cells["sobol"]))
        if cells["pgd_sobol"] is not None and cells["sobol"] is not None:
            # descent must not make the set noticeably worse
            checks.append(Check(str(n), "pgd_sobol<=sobol", cells["pgd_sobol"], cells["sobol"], "upper", 0.01))
    sources = {"pgd_l2_subset": "paper", "l2_subset": "paper"}
    return TableResult(f"linf_{d}d", columns, rows, checks, sources)


def _planar_l2_row(args):
    kind, n = args
    out = {}
    for name, start in (("sobol", sobol(n, 2)), ("fibonacci", fibonacci_set(n))):
        out[name] = l2_squared(start, kind).root
        out[f"pgd_{name}"] = descend(start, kind).final_root
    return out


def planar_l2_table(kind: DiscrepancyKind, jobs: int = 1, **_) -> TableResult:
    quoted = ref.PERIODIC_2D if kind is PERIODIC else ref.EXTREME_2D
    tag = "periodic" if kind is PERIODIC else "extreme"
    ns = sorted(quoted)
    results = _map(_planar_l2_row, [(kind, n) for n in ns], jobs)
    columns = ["n", "pgd_sobol", "pgd_fibonacci", "mpmc", "sobol", "fibonacci"]
    rows, checks = [], []
    for n, cells in zip(ns, results):
        p_pgd_sob, p_pgd_fib, mpmc, p_sob, p_fib = quoted[n]
        rows.append({"n": n, "mpmc": mpmc, **cells})
        checks.append(Check(str(n), "fibonacci", cells["fibonacci"], p_fib, "abs", 1e-5))
        checks.append(Check(str(n), "pgd_fibonacci", cells["pgd_fibonacci"], p_pgd_fib, "rel", 0.10))
        checks.append(Check(str(n), "pgd_fibonacci<=fibonacci", cells["pgd_fibonacci"], cells["fibonacci"], "upper", 0.0))
        checks.append(_baseline_check(str(n), "sobol", f"{tag}/n{n}/initial", cells["sobol"]))
        checks.append(_baseline_check(str(n), "pgd_sobol", f"{tag}/n{n}/pgd", cells["pgd_sobol"]))
    return TableResult(f"{tag}_2d", columns, rows, checks, {"mpmc": "paper"})


# --- figures --------------------------------------------------------------


def _sweep_row(n: int):
    starts = {"fibonacci": fibonacci_set(n), "sqrt2": kronecker_lattice(n, math.sqrt(2.0)), "sobol": sobol(n, 2)}
    row = {"n": n}
    for name, ps in starts.items():
        row[f"l2_{name}"] = l2_squared(ps, L2_STAR).root
        row[f"linf_{name}"] = linf_star(ps)
    report = descend(starts["fibonacci"])
    row["l2_pgd"] = report.final_root
    row["linf_pgd"] = linf_star(report.final_set)
    return row


FULL_SWEEP = list(range(20, 1021, 20))


def sweep_ns(full: bool, default: Sequence[int]) -> list[int]:
    """The n values of a sweep: every 20 up to 1020 in the long mode, ``default`` otherwise."""
    return list(FULL_SWEEP) if full else list(default)


def fig1(full: bool = False, ns=None, jobs: int = 1, **_) -> TableResult:
    """Star discrepancies of classical planar sets and of the descended Fibonacci set."""
    if ns is None:
        ns = sweep_ns(full, [20, 100, 260, 500, 1020])
    rows = _map(_sweep_row, list(ns), jobs)
    columns = list(rows[0])
    checks = []
    for row in rows:
        best_classical = min(row["linf_fibonacci"], row["linf_sqrt2"], row["linf_sobol"])
        checks.append(Check(str(row["n"]), "linf_pgd<=classical", row["linf_pgd"], best_classical, "upper", 0.0))
    return TableResult("fig1", columns, rows, checks)


def trajectory_table(name: str, kind: DiscrepancyKind, starts: dict, alphas: dict, steps: int = 200) -> TableResult:
    trajectories = {}
    for label, start in starts.items():
        report = descend(start, kind, steps=steps, alpha=alphas[label])
        trajectories[label] = report.trajectory
    columns = ["iteration"]
    for label in starts:
        columns += [f"{label}_squared", f"{label}_root"]
    rows = []
    for t in range(steps + 1):
        row = {"iteration": t}
        for label, traj in trajectories.items():
            if t < len(traj):
                row[f"{label}_squared"] = traj[t]
                row[f"{label}_root"] = math.sqrt(max(traj[t], 0.0))
        rows.append(row)
    checks = []
    for label, traj in trajectories.items():
        lo = min(traj)
        checks.append(Check(label, "min<=initial", lo, traj[0], "upper", 0.0))
        # the tail settles near the lowest value reached
        checks.append(Check(label, "final~min", traj[-1], lo, "upper", 0.01))
    return TableResult(name, columns, rows, checks)


def fig3(ns=None, steps: int = 200, **_) -> TableResult:
    ns = [60, 240, 1020] if ns is None else ns
    starts = {f"n{n}": fibonacci_set(n) for n in ns}
    alphas = {f"n{n}": default_alpha(n) for n in ns}
    return trajectory_table("fig3", L2_STAR, starts, alphas, steps)


def fig5(ns=None, steps: int = 200, full: bool = False, **_) -> TableResult:
    """Periodic L2 along the descent from Sobol' starts."""
    ns = sweep_ns(full, [64, 128]) if ns is None else ns
    starts = {f"n{n}": sobol(n, 2) for n in ns}
    alphas = {f"n{n}": default_alpha(n) for n in ns}
    return trajectory_table("fig5", PERIODIC, starts, alphas, steps)


def fig2(restarts: int = 400, seed: int = 0, fraction: float = 0.1, **_) -> TableResult:
    """Random restarts from a uniform random n = 260 set."""
    start = random_set(260, 2, seed)
    result = optimize_with_restarts(start, L2_STAR, AdamConfig(), restarts, fraction, seed, keep_runs=False)
    rows = [{"restart": i, "l2_before_restart": math.sqrt(max(v, 0.0))} for i, v in enumerate(result.before_restart)]
    best_linf = linf_star(result.best_set)
    rows.append({"restart": "best", "l2_before_restart": result.best_root, "linf_best": best_linf})
    checks = [
        Check("best", "l2", result.best_root, ref.RESTART_BEST_L2, "rel", 0.10),
        Check("best", "linf", best_linf, ref.RESTART_BEST_LINF, "rel", 0.10),
    ]
    return TableResult("fig2", ["restart", "l2_before_restart", "linf_best"], rows, checks)


REPRODUCIBLE = {
    "table1": table1,
    "table2": table2,
    "table3": table3,
    "table5": lambda **kw: higher_dim_table(3, **kw),
    "table6": lambda **kw: higher_dim_table(4, **kw),
    "table7": lambda **kw: higher_dim_table(5, **kw),
    "table-periodic": lambda **kw: planar_l2_table(PERIODIC, **kw),
    "table-extreme": lambda **kw: planar_l2_table(EXTREME, **kw),
    "fig1": fig1,
    "fig2": fig2,
    "fig3": fig3,
    "fig5": fig5,
}

ALIASES = {
    "compa-linf-2d": "table3",
    "linf-3d": "table5",
    "linf-4d": "table6",
    "linf-5d": "table7",
}


def reproduce(name: str, **options) -> TableResult:
    key = ALIASES.get(name, name)
    if key not in REPRODUCIBLE:
        raise KeyError(f"unknown experiment {name!r}; choose from {', '.join(sorted(REPRODUCIBLE))}")
    return REPRODUCIBLE[key](**options)
