"""Closed-form L2 discrepancies (star, periodic, extreme) and their smoothed gradients.

Each measure has the Warnock-like shape

    squared = constant + single-point sum + (1/n^2) * sum_{i,j} prod_k f(x_ik, x_jk)

with a pair factor ``f`` that contains a max, a min or an absolute value.
The exact evaluators use those functions as-is.  The smoothed losses replace
them with :func:`smax`, :func:`smin` and :func:`sabs`, which are
differentiable everywhere, and :func:`l2_grad` differentiates the smoothed
loss analytically.

All double sums go through :func:`math.fsum`, which is exactly rounded and
therefore independent of point order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .core import DiscrepancyKind, KindUnsupported, PointsLike, as_array

DEFAULT_TAU = 1e-15

KindLike = Union[DiscrepancyKind, str]


@dataclass(frozen=True)
class SmoothingParams:
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")


class L2Value(NamedTuple):
    """Squared discrepancy (what the closed forms give) and its square root."""

    squared: float
    root: float

    @classmethod
    def from_squared(cls, squared: float) -> "L2Value":
        return cls(float(squared), math.sqrt(max(float(squared), 0.0)))


def smax(a, b, tau):
    """tau-softmax ``(a + b + sqrt((a - b)^2 + tau)) / 2``."""
    return 0.5 * (a + b + np.sqrt((a - b) ** 2 + tau))


def smin(a, b, tau):
    return 0.5 * (a + b - np.sqrt((a - b) ** 2 + tau))


def sabs(x, tau):
    return np.sqrt(x * x + tau)


def _l2_kind(kind: KindLike) -> DiscrepancyKind:
    kind = DiscrepancyKind.parse(kind)
    if not kind.is_l2:
        raise KindUnsupported(f"{kind} has no closed L2 form")
    return kind


def _tau_of(smoothing) -> float:
    if isinstance(smoothing, SmoothingParams):
        return smoothing.tau
    tau = float(smoothing)
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return tau


def _constant(kind: DiscrepancyKind, d: int) -> float:
    if kind is DiscrepancyKind.L2_STAR:
        return 3.0**-d
    if kind is DiscrepancyKind.L2_PERIODIC:
        return -(3.0**-d)
    return 12.0**-d


def _single_factors(kind: DiscrepancyKind, x: np.ndarray):
    """Per-point factors of the single sum, their derivatives, and the sum's weight."""
    n, d = x.shape
    if kind is DiscrepancyKind.L2_STAR:
        return 1.0 - x * x, -2.0 * x, -(2.0 ** (1 - d)) / n
    if kind is DiscrepancyKind.L2_EXTREME:
        return 0.5 * x * (1.0 - x), 0.5 - x, -2.0 / n
    return None, None, 0.0


def _pair_factors(kind: DiscrepancyKind, x: np.ndarray, tau: float | None, with_grad: bool = False):
    """Pair factors ``f(x_ik, x_jk)`` as a list of d arrays of shape (n, n).

    ``tau=None`` selects the exact (non-smooth) factors.  With ``with_grad``
    the derivatives with respect to the first argument are returned too.
    """
    factors, slopes = [], []
    for k in range(x.shape[1]):
        col = x[:, k]
        a = col[:, None]
        b = col[None, :]
        diff = a - b
        if tau is None:
            if kind is DiscrepancyKind.L2_STAR:
                factors.append(1.0 - np.maximum(a, b))
            elif kind is DiscrepancyKind.L2_PERIODIC:
                factors.append(0.5 - np.abs(diff) + diff * diff)
            else:
                factors.append(np.minimum(a, b) * (1.0 - np.maximum(a, b)))
            continue
        root = np.sqrt(diff * diff + tau)
        if kind is DiscrepancyKind.L2_STAR:
            factors.append(1.0 - 0.5 * (a + b + root))
            if with_grad:
                slopes.append(-0.5 * (1.0 + diff / root))
        elif kind is DiscrepancyKind.L2_PERIODIC:
            factors.append(0.5 - root + diff * diff)
            if with_grad:
                slopes.append(2.0 * diff - diff / root)
        else:
            lo = 0.5 * (a + b - root)
            hi = 0.5 * (a + b + root)
            factors.append(lo * (1.0 - hi))
            if with_grad:
                slope = diff / root
                slopes.append(0.5 * (1.0 - slope) * (1.0 - hi) - lo * 0.5 * (1.0 + slope))
    if with_grad:
        return factors, slopes
    return factors


def _product(arrays):
    out = arrays[0].copy()
    for arr in arrays[1:]:
        out *= arr
    return out


def _symmetric_sum(matrix: np.ndarray) -> float:
    """Exactly rounded sum of a symmetric matrix from its upper triangle."""
    upper = matrix[np.triu_indices(matrix.shape[0], 1)]
    return math.fsum([2.0 * math.fsum(upper), math.fsum(np.diagonal(matrix))])


def _assemble(kind: DiscrepancyKind, x: np.ndarray, pair) -> float:
    n, d = x.shape
    single, _, weight = _single_factors(kind, x)
    terms = [_constant(kind, d), _symmetric_sum(_product(pair)) / (n * n)]
    if single is not None:
        terms.append(weight * math.fsum(np.prod(single, axis=1)))
    return math.fsum(terms)


def l2_squared(points: PointsLike, kind: KindLike) -> L2Value:
    """Exact squared L2 discrepancy of the given kind, O(d n^2)."""
    kind = _l2_kind(kind)
    x = as_array(points)
    return L2Value.from_squared(_assemble(kind, x, _pair_factors(kind, x, None)))


def l2_star_sq(points: PointsLike) -> L2Value:
    """Squared L2 star discrepancy by Warnock's formula."""
    return l2_squared(points, DiscrepancyKind.L2_STAR)


def l2_periodic_sq(points: PointsLike) -> L2Value:
    return l2_squared(points, DiscrepancyKind.L2_PERIODIC)


def l2_extreme_sq(points: PointsLike) -> L2Value:
    """Squared L2 extreme discrepancy, the average over all boxes ``[p, q)`` with ``p <= q``."""
    return l2_squared(points, DiscrepancyKind.L2_EXTREME)


def l2_loss_smoothed(points: PointsLike, kind: KindLike, smoothing=DEFAULT_TAU) -> float:
    """Squared discrepancy with max/min/abs replaced by their tau-smoothed versions."""
    kind = _l2_kind(kind)
    x = as_array(points)
    tau = _tau_of(smoothing)
    return _assemble(kind, x, _pair_factors(kind, x, tau))


def _products_excluding_each(factors: list) -> list:
    """``out[k] = prod_{l != k} factors[l]`` without division."""
    d = len(factors)
    if d == 1:
        return [np.ones_like(factors[0])]
    prefix = [None] * d
    prefix[1] = factors[0]
    for k in range(2, d):
        prefix[k] = prefix[k - 1] * factors[k - 1]
    out = [None] * d
    out[d - 1] = prefix[d - 1]
    suffix = factors[d - 1]
    for k in range(d - 2, 0, -1):
        out[k] = prefix[k] * suffix
        suffix = suffix * factors[k]
    out[0] = suffix
    return out


def l2_value_and_grad(points: PointsLike, kind: KindLike, smoothing=DEFAULT_TAU):
    """Smoothed loss and its gradient with respect to every coordinate, shape (n, d)."""
    kind = _l2_kind(kind)
    x = as_array(points)
    tau = _tau_of(smoothing)
    if tau == 0:
        raise ValueError("the gradient needs tau > 0")
    n, d = x.shape
    f, df = _pair_factors(kind, x, tau, with_grad=True)
    grad = np.empty_like(x)
    # the pair sum is symmetric in (i, j), so both orderings contribute equally
    for k, others in enumerate(_products_excluding_each(f)):
        grad[:, k] = (2.0 / (n * n)) * np.einsum("ij,ij->i", others, df[k])
    single, dsingle, weight = _single_factors(kind, x)
    if single is not None:
        cols = [single[:, k] for k in range(d)]
        for k, others in enumerate(_products_excluding_each(cols)):
            grad[:, k] += weight * others * dsingle[:, k]
    return _assemble(kind, x, f), grad


def l2_grad(points: PointsLike, kind: KindLike, smoothing=DEFAULT_TAU) -> np.ndarray:
    """Gradient of :func:`l2_loss_smoothed`."""
    return l2_value_and_grad(points, kind, smoothing)[1]
