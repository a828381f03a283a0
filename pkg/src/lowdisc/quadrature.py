"""Exact integration of the defining L2 integrals, for validating the closed forms.

The local discrepancy ``count(B)/n - vol(B)`` is piecewise polynomial: its
count part is constant on the cells cut out by the point coordinates.  Every
box family factorises over the axes (anchored intervals ``[0, q)``, intervals
``[p, q)`` with ``p <= q``, or wrapping intervals on the circle), so each axis
is split into one-dimensional cells, and for every cell we record

* which points lie in the interval for every parameter value in the cell, and
* the exact integrals of ``len^0``, ``len^1``, ``len^2`` over the cell.

Expanding ``(c/n - prod len_k)^2`` turns each product cell into three products
of one-dimensional integrals.  Everything is done in :class:`fractions.Fraction`,
starting from the exact binary value of each coordinate, so the result is the
integral itself rounded once to binary64.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .core import DiscrepancyError, DiscrepancyKind, KindUnsupported, PointsLike, as_array

DEFAULT_MAX_CELLS = 2_000_000


class TooExpensive(DiscrepancyError, RuntimeError):
    pass


class _Cell(NamedTuple):
    moments: tuple[Fraction, Fraction, Fraction]
    members: tuple[bool, ...]


def _g(u: Fraction, m: int) -> Fraction:
    # second antiderivative of u^m
    return u ** (m + 2) / ((m + 1) * (m + 2))


def _rectangle(a, b, c, e, shift, m) -> Fraction:
    """Integral of ``(q - p + shift)^m`` over ``a <= p <= b``, ``c <= q <= e``."""
    return (
        _g(e - a + shift, m)
        - _g(e - b + shift, m)
        - _g(c - a + shift, m)
        + _g(c - b + shift, m)
    )


def _star_cells(xs: list[Fraction], breaks: list[Fraction]) -> list[_Cell]:
    cells = []
    for a, b in zip(breaks, breaks[1:]):
        moments = tuple((b ** (m + 1) - a ** (m + 1)) / (m + 1) for m in range(3))
        cells.append(_Cell(moments, tuple(x <= a for x in xs)))
    return cells


def _extreme_cells(xs, breaks) -> list[_Cell]:
    cells = []
    intervals = list(zip(breaks, breaks[1:]))
    for s, (a, b) in enumerate(intervals):
        # p and q in the same interval: p <= q, no point strictly between
        moments = tuple(_g(b - a, m) for m in range(3))
        cells.append(_Cell(moments, (False,) * len(xs)))
        for c, e in intervals[s + 1 :]:
            moments = tuple(_rectangle(a, b, c, e, 0, m) for m in range(3))
            cells.append(_Cell(moments, tuple(b <= x <= c for x in xs)))
    return cells


def _periodic_cells(xs, breaks) -> list[_Cell]:
    # the circle identifies 1 with 0
    xs = [x if x < 1 else Fraction(0) for x in xs]
    cells = []
    intervals = list(zip(breaks, breaks[1:]))
    for s, (a, b) in enumerate(intervals):
        for t, (c, e) in enumerate(intervals):
            if t > s:
                moments = tuple(_rectangle(a, b, c, e, 0, m) for m in range(3))
                members = tuple(b <= x <= c for x in xs)
            elif t < s:
                # q < p: the interval wraps around, length q - p + 1
                moments = tuple(_rectangle(a, b, c, e, 1, m) for m in range(3))
                members = tuple(x >= b or x <= c for x in xs)
            else:
                w = b - a
                upper = tuple(_g(w, m) for m in range(3))
                cells.append(_Cell(upper, (False,) * len(xs)))
                lower = tuple(
                    w / (m + 1) - (1 - (1 - w) ** (m + 2)) / ((m + 1) * (m + 2)) for m in range(3)
                )
                cells.append(_Cell(lower, (True,) * len(xs)))
                continue
            cells.append(_Cell(moments, members))
    return cells


_CELL_BUILDERS = {
    DiscrepancyKind.L2_STAR: _star_cells,
    DiscrepancyKind.L2_EXTREME: _extreme_cells,
    DiscrepancyKind.L2_PERIODIC: _periodic_cells,
}


def quadrature_exact(points: PointsLike, kind, max_cells: int = DEFAULT_MAX_CELLS) -> Fraction:
    """The squared L2 discrepancy as an exact rational number."""
    kind = DiscrepancyKind.parse(kind)
    if kind not in _CELL_BUILDERS:
        raise KindUnsupported(f"no quadrature for {kind}")
    x = as_array(points)
    n, d = x.shape
    builder = _CELL_BUILDERS[kind]
    axes = []
    for k in range(d):
        xs = [Fraction(float(v)) for v in x[:, k]]
        breaks = sorted(set(xs) | {Fraction(0), Fraction(1)})
        axes.append(builder(xs, breaks))
    total_cells = math.prod(len(a) for a in axes)
    if total_cells > max_cells:
        raise TooExpensive(f"{total_cells} cells exceed the budget of {max_cells}")

    total = Fraction(0)
    nn = Fraction(n)
    for combo in itertools.product(*axes):
        count = sum(all(cell.members[i] for cell in combo) for i in range(n))
        vol0 = math.prod(cell.moments[0] for cell in combo)
        vol1 = math.prod(cell.moments[1] for cell in combo)
        vol2 = math.prod(cell.moments[2] for cell in combo)
        frac = count / nn
        total += frac * frac * vol0 - 2 * frac * vol1 + vol2
    return total


def quadrature_oracle(points: PointsLike, kind, max_cells: int = DEFAULT_MAX_CELLS) -> float:
    """Squared L2 discrepancy by exact cell-wise integration of its definition."""
    return float(quadrature_exact(points, kind, max_cells))


def midpoint_star_estimate(points: PointsLike, resolution: int) -> float:
    """Midpoint-rule estimate of the squared L2 star discrepancy on an ``m^d`` grid.

    Error is O(1/m) because the integrand jumps across point coordinates.
    Intended only as a coarse sanity check in any dimension.
    """
    x = as_array(points)
    n, d = x.shape
    if resolution ** d > DEFAULT_MAX_CELLS:
        raise TooExpensive(f"{resolution}^{d} grid points exceed the budget")
    mids = (np.arange(resolution) + 0.5) / resolution
    total = 0.0
    for q in itertools.product(mids, repeat=d):
        q = np.array(q)
        local = np.all(x < q, axis=1).sum() / n - np.prod(q)
        total += local * local
    return total / resolution ** d
