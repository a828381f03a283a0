"""Exact L-infinity star discrepancy.

The supremum over anchored boxes ``[0, q)`` is attained (as a limit) at the
corners of the critical grid ``G_1 x ... x G_d`` where ``G_k`` holds the
distinct ``k``-th coordinates plus 1.  At a corner ``q`` two candidates are
checked::

    vol(q) - #{x : x < q}/n          (box just below q, open count)
    #{x : x <= q}/n - vol(q)         (box just above q, closed count)

:func:`linf_star_exact` enumerates the grid for any ``d`` with
branch-and-bound pruning (compiled with numba); :func:`linf_star_2d` is an
independent O(n^2) sweep for the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .core import DiscrepancyError, PointsLike, as_array

DEFAULT_BUDGET = 2**31


class BudgetExceeded(DiscrepancyError, RuntimeError):
    def __init__(self, estimated_boxes: int, budget: int):
        self.estimated_boxes = estimated_boxes
        self.budget = budget
        super().__init__(f"{estimated_boxes} grid boxes exceed the budget of {budget}")


class WrongDimension(DiscrepancyError, ValueError):
    pass


@dataclass(frozen=True)
class GridSlice:
    """Per-axis critical grids and the rank of every point on each axis."""

    grids: tuple[np.ndarray, ...]
    ranks: np.ndarray

    @classmethod
    def from_points(cls, x: np.ndarray) -> "GridSlice":
        grids = []
        ranks = np.empty(x.shape, dtype=np.int64)
        for k in range(x.shape[1]):
            g = np.unique(np.append(x[:, k], 1.0))
            grids.append(g)
            ranks[:, k] = np.searchsorted(g, x[:, k])
        return cls(tuple(grids), ranks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.grids)

    @property
    def boxes(self) -> int:
        return math.prod(self.sizes)


@dataclass(frozen=True)
class LinfResult:
    value: float
    boxes_visited: int
    boxes_total: int

    @property
    def pruned_fraction(self) -> float:
        return 1.0 - self.boxes_visited / self.boxes_total


@numba.njit(cache=True)
def _search(ranks, grid, sizes, prune):
    n, d = ranks.shape
    best = 0.0
    visited = 0

    # minimal volume of the still-free axes after fixing axes 0..j
    tail_min = np.ones(d)
    for j in range(d - 2, -1, -1):
        tail_min[j] = tail_min[j + 1] * grid[j + 1, 0]
    # grid boxes below a node at level j
    tail_boxes = np.ones(d, dtype=np.int64)
    for j in range(d - 2, -1, -1):
        tail_boxes[j] = tail_boxes[j + 1] * sizes[j + 1]

    open_ids = np.empty((d, n), dtype=np.int64)
    closed_ids = np.empty((d, n), dtype=np.int64)
    n_open = np.zeros(d, dtype=np.int64)
    n_closed = np.zeros(d, dtype=np.int64)
    volume = np.ones(d + 1)
    last = d - 1
    h_open = np.zeros(sizes[last], dtype=np.int64)
    h_closed = np.zeros(sizes[last], dtype=np.int64)

    if d == 1:
        for p in range(n):
            open_ids[0, p] = p
            closed_ids[0, p] = p
        n_open[0] = n
        n_closed[0] = n

    idx = np.zeros(d, dtype=np.int64)
    level = 0
    while d > 1 and level >= 0:
        if idx[level] >= sizes[level]:
            level -= 1
            if level >= 0:
                idx[level] += 1
            continue
        r = idx[level]
        q = grid[level, r]
        no = 0
        nc = 0
        if level == 0:
            for p in range(n):
                if ranks[p, 0] < r:
                    open_ids[0, no] = p
                    no += 1
                if ranks[p, 0] <= r:
                    closed_ids[0, nc] = p
                    nc += 1
        else:
            for s in range(n_open[level - 1]):
                p = open_ids[level - 1, s]
                if ranks[p, level] < r:
                    open_ids[level, no] = p
                    no += 1
            for s in range(n_closed[level - 1]):
                p = closed_ids[level - 1, s]
                if ranks[p, level] <= r:
                    closed_ids[level, nc] = p
                    nc += 1
        n_open[level] = no
        n_closed[level] = nc
        volume[level + 1] = volume[level] * q

        if prune:
            # open counts can drop to 0 and volumes only shrink further down
            bound = max(volume[level + 1], nc / n - volume[level + 1] * tail_min[level])
            if bound + 1e-14 <= best:
                idx[level] += 1
                continue

        if level < d - 2:
            level += 1
            idx[level] = 0
            continue

        # leaf: sweep the last axis with incremental counts
        src = d - 2
        h_open[:] = 0
        h_closed[:] = 0
        for s in range(n_open[src]):
            h_open[ranks[open_ids[src, s], last]] += 1
        for s in range(n_closed[src]):
            h_closed[ranks[closed_ids[src, s], last]] += 1
        below = 0
        upto = 0
        base = volume[d - 1]
        for t in range(sizes[last]):
            upto += h_closed[t]
            vol = base * grid[last, t]
            val = vol - below / n
            if val > best:
                best = val
            val = upto / n - vol
            if val > best:
                best = val
            below += h_open[t]
        visited += sizes[last]
        idx[level] += 1

    if d == 1:
        below = 0
        upto = 0
        h_open[:] = 0
        for p in range(n):
            h_open[ranks[p, 0]] += 1
        for t in range(sizes[0]):
            upto += h_open[t]
            vol = grid[0, t]
            val = vol - below / n
            if val > best:
                best = val
            val = upto / n - vol
            if val > best:
                best = val
            below += h_open[t]
        visited = sizes[0]
    return best, visited


def linf_star_search(points: PointsLike, budget: int = DEFAULT_BUDGET, prune: bool = True) -> LinfResult:
    """Exact L-infinity star discrepancy with search statistics."""
    x = as_array(points)
    gs = GridSlice.from_points(x)
    total = gs.boxes
    if total > budget:
        raise BudgetExceeded(total, budget)
    # largest grids outermost
    order = sorted(range(x.shape[1]), key=lambda k: -gs.sizes[k])
    sizes = np.array([gs.sizes[k] for k in order], dtype=np.int64)
    grid = np.zeros((len(order), int(sizes.max())))
    for j, k in enumerate(order):
        grid[j, : sizes[j]] = gs.grids[k]
    ranks = np.ascontiguousarray(gs.ranks[:, order])
    value, visited = _search(ranks, grid, sizes, prune)
    return LinfResult(float(value), int(visited), int(total))


def linf_star_exact(points: PointsLike, budget: int = DEFAULT_BUDGET, prune: bool = True) -> float:
    """Exact L-infinity star discrepancy by pruned enumeration of the critical grid.

    Raises
    ------
    BudgetExceeded
        If the critical grid has more than ``budget`` corners.
    """
    return linf_star_search(points, budget, prune).value


def linf_star_2d(points: PointsLike) -> float:
    """Exact L-infinity star discrepancy of a planar set in O(n^2) time and memory."""
    x = as_array(points)
    n, d = x.shape
    if d != 2:
        raise WrongDimension(f"linf_star_2d needs d = 2, got d = {d}")
    gx = np.unique(np.append(x[:, 0], 1.0))
    gy = np.unique(np.append(x[:, 1], 1.0))
    hist = np.zeros((len(gx), len(gy)), dtype=np.int64)
    np.add.at(hist, (np.searchsorted(gx, x[:, 0]), np.searchsorted(gy, x[:, 1])), 1)
    closed = hist.cumsum(axis=0).cumsum(axis=1)
    opened = np.zeros_like(closed)
    opened[1:, 1:] = closed[:-1, :-1]
    vol = gx[:, None] * gy[None, :]
    return float(max((vol - opened / n).max(), (closed / n - vol).max()))


def linf_star(points: PointsLike, budget: int = DEFAULT_BUDGET) -> float:
    """Dispatch to the planar sweep when ``d == 2``."""
    x = as_array(points)
    if x.shape[1] == 2:
        return linf_star_2d(x)
    return linf_star_exact(x, budget)
