"""Projected ADAM descent on smoothed L2 discrepancy losses."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DiscrepancyError, DiscrepancyKind, KindUnsupported, PointSet, PointsLike, as_array
from .l2 import DEFAULT_TAU, l2_squared, l2_value_and_grad
from .linf import DEFAULT_BUDGET, linf_star_2d, linf_star_exact

logger = logging.getLogger(__name__)


class NonFiniteGradient(DiscrepancyError, FloatingPointError):
    def __init__(self, index: tuple[int, int], value: float):
        self.index = index
        self.value = value
        super().__init__(f"gradient entry {index} is {value!r}")


@dataclass(frozen=True)
class AdamConfig:
    alpha: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    steps: int = 200
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


def default_alpha(n: int) -> float:
    """Learning rate rule of thumb: 5e-4 below 100 points, 1e-4 otherwise."""
    return 5e-4 if n < 100 else 1e-4


@dataclass(frozen=True)
class Track:
    """Evaluate ``metric`` on the iterates every ``every`` steps (plus first and last)."""

    metric: DiscrepancyKind = DiscrepancyKind.LINF_STAR
    every: Optional[int] = None
    budget: int = DEFAULT_BUDGET

    def interval(self, d: int) -> int:
        if self.every is not None:
            return max(1, self.every)
        return 1 if d == 2 else 10


@dataclass
class OptimizeReport:
    kind: DiscrepancyKind
    config: AdamConfig
    trajectory: list[float]
    final_set: PointSet
    clamp_events: int = 0
    wall_ms: float = 0.0
    best_set: Optional[PointSet] = None
    best_value: Optional[float] = None
    best_iteration: Optional[int] = None
    final_metric: Optional[float] = None
    tracked: list[tuple[int, float]] = field(default_factory=list)
    aborted: Optional[str] = None
    initial_exact: float = math.nan
    final_exact: float = math.nan

    @property
    def steps_done(self) -> int:
        return len(self.trajectory) - 1

    @property
    def initial_root(self) -> float:
        return math.sqrt(max(self.initial_exact, 0.0))

    @property
    def final_root(self) -> float:
        """Exact discrepancy (square root of the closed form) of the returned set."""
        return math.sqrt(max(self.final_exact, 0.0))


def _check_l2(kind) -> DiscrepancyKind:
    kind = DiscrepancyKind.parse(kind)
    if not kind.is_l2:
        raise KindUnsupported(f"cannot descend on {kind}: no smooth closed form")
    return kind


def _metric_fn(track: Track, d: int) -> Callable[[np.ndarray], float]:
    if track.metric is DiscrepancyKind.LINF_STAR:
        if d == 2:
            return linf_star_2d
        return lambda x: linf_star_exact(x, track.budget)
    return lambda x: l2_squared(x, track.metric).root


def adam_project_step(x, m, v, t: int, cfg: AdamConfig, grad: np.ndarray):
    """One ADAM update followed by clamping to the unit cube.

    Parameters
    ----------
    x, m, v : ndarray
        Current iterate and moment estimates, shape (n, d).
    t : int
        Step number, starting at 1 (used in the bias corrections).
    grad : ndarray
        Loss gradient at ``x``.

    Returns
    -------
    x_next, m_next, v_next, clamped
        ``clamped`` counts coordinates the projection moved.
    """
    if t < 1:
        raise ValueError("step numbers start at 1")
    bad = ~np.isfinite(grad)
    if bad.any():
        i, k = (int(c) for c in np.argwhere(bad)[0])
        raise NonFiniteGradient((i, k), float(grad[i, k]))
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
    m_hat = m / (1.0 - cfg.beta1**t)
    v_hat = v / (1.0 - cfg.beta2**t)
    tentative = x - cfg.alpha * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    x_next = np.clip(tentative, 0.0, 1.0)
    clamped = int(np.count_nonzero(x_next != tentative))
    return x_next, m, v, clamped


def loss_step(x, m, v, t: int, cfg: AdamConfig, kind=DiscrepancyKind.L2_STAR):
    """Evaluate the smoothed gradient of ``kind`` at ``x`` and take one projected step."""
    _, grad = l2_value_and_grad(x, _check_l2(kind), cfg.tau)
    return adam_project_step(x, m, v, t, cfg, grad)


def optimize(
    p0: PointsLike,
    kind=DiscrepancyKind.L2_STAR,
    cfg: AdamConfig = AdamConfig(),
    track: Optional[Track] = None,
    callback: Optional[Callable[[int, np.ndarray, float], None]] = None,
) -> OptimizeReport:
    """Run projected ADAM for ``cfg.steps`` iterations.

    ``trajectory[t]`` is the smoothed loss of iterate ``t`` (``P_0`` included),
    i.e. the function being minimised; ``final_exact`` is the exact squared
    discrepancy of the returned set.  With ``track`` set, ``best_set`` is the
    evaluated iterate with the smallest tracked metric.  ``P_0`` is always
    evaluated, so the best set is never worse than the input.

    A non-finite gradient or loss stops the run early; the report then carries
    the reason in ``aborted`` and the last finite iterate.
    """
    kind = _check_l2(kind)
    start = time.perf_counter()
    x = np.array(as_array(p0), dtype=np.float64)
    n, d = x.shape
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    trajectory: list[float] = []
    report = OptimizeReport(kind, cfg, trajectory, PointSet(x))
    report.initial_exact = l2_squared(x, kind).squared
    previous = x

    metric = _metric_fn(track, d) if track is not None else None
    every = track.interval(d) if track is not None else 0

    def evaluate(t: int, iterate: np.ndarray):
        value = metric(iterate)
        report.tracked.append((t, value))
        if report.best_value is None or value < report.best_value:
            report.best_value = value
            report.best_iteration = t
            report.best_set = PointSet(iterate)

    if metric is not None:
        evaluate(0, x)

    for t in range(1, cfg.steps + 2):
        loss, grad = l2_value_and_grad(x, kind, cfg.tau)
        if not math.isfinite(loss):
            report.aborted = f"non-finite loss at step {t - 1}"
            logger.warning("stopping: %s", report.aborted)
            x = previous
            break
        trajectory.append(loss)
        if callback is not None:
            callback(t - 1, x, loss)
        if t > cfg.steps:
            break
        try:
            x_next, m, v, clamped = adam_project_step(x, m, v, t, cfg, grad)
        except NonFiniteGradient as exc:
            report.aborted = str(exc)
            logger.warning("stopping at step %d: %s", t, exc)
            break
        previous, x = x, x_next
        report.clamp_events += clamped
        if metric is not None and (t % every == 0 or t == cfg.steps):
            evaluate(t, x)

    report.final_set = PointSet(x)
    report.final_exact = l2_squared(x, kind).squared
    if metric is not None:
        last_t = report.steps_done
        if report.tracked[-1][0] != last_t:
            evaluate(last_t, x)
        report.final_metric = report.tracked[-1][1]
    report.wall_ms = (time.perf_counter() - start) * 1e3
    return report


def random_restart(points: PointsLike, fraction: float, seed: int) -> PointSet:
    """Redraw ``ceil(fraction * n * d)`` uniformly chosen coordinates uniformly on ``[0, 1)``."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    x = np.array(as_array(points), dtype=np.float64)
    rng = np.random.Generator(np.random.Philox(seed))
    count = math.ceil(fraction * x.size)
    slots = rng.choice(x.size, size=count, replace=False)
    flat = x.reshape(-1)
    flat[slots] = rng.random(count)
    return PointSet(x)


@dataclass
class RestartReport:
    best_set: PointSet
    best_squared: float
    runs: list[OptimizeReport]
    before_restart: list[float]

    @property
    def best_root(self) -> float:
        return math.sqrt(max(self.best_squared, 0.0))


def optimize_with_restarts(
    p0: PointsLike,
    kind=DiscrepancyKind.L2_STAR,
    cfg: AdamConfig = AdamConfig(),
    restarts: int = 0,
    fraction: float = 0.1,
    seed: int = 0,
    track: Optional[Track] = None,
    keep_runs: bool = True,
) -> RestartReport:
    """Descend, perturb part of the result, descend again; keep the best set by loss.

    ``before_restart`` holds the final squared loss of each run that was
    followed by a restart.
    """
    seeds = np.random.SeedSequence(seed).generate_state(max(restarts, 1), dtype=np.uint64)
    report = optimize(p0, kind, cfg, track)
    runs = [report]
    best_set, best = report.final_set, report.trajectory[-1]
    before = []
    current = report.final_set
    for r in range(restarts):
        before.append(report.trajectory[-1])
        start = random_restart(current, fraction, int(seeds[r]))
        report = optimize(start, kind, cfg, track)
        if keep_runs:
            runs.append(report)
        current = report.final_set
        if report.trajectory[-1] < best:
            best_set, best = report.final_set, report.trajectory[-1]
    return RestartReport(best_set, best, runs, before)

