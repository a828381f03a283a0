from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from lowdisc.l2 import l2_squared
from lowdisc.quadrature import TooExpensive, midpoint_star_estimate, quadrature_exact, quadrature_oracle

KINDS = ["l2-star", "l2-periodic", "l2-extreme"]


def test_analytic_cases():
    assert quadrature_exact([[0.5]], "l2-star") == Fraction(1, 12)
    assert quadrature_exact([[0.3]], "l2-periodic") == Fraction(1, 6)
    assert quadrature_exact([[0.5]], "l2-extreme") == Fraction(1, 12)


def test_two_points_star():
    x = [[0.25], [0.75]]
    # by hand: q^2 on [0, 1/4], (1/2 - q)^2 on [1/4, 3/4], (1 - q)^2 on [3/4, 1]
    by_hand = Fraction(1, 192) + Fraction(1, 96) + Fraction(1, 192)
    assert quadrature_exact(x, "l2-star") == by_hand == Fraction(1, 48)
    assert l2_squared(x, "l2-star").squared == pytest.approx(1 / 48, abs=1e-16)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("d", [1, 2])
def test_closed_forms_match_quadrature(kind, d):
    rng = np.random.default_rng(100 + d)
    for _ in range(10):
        n = int(rng.integers(1, 6))
        x = rng.random((n, d))
        assert abs(l2_squared(x, kind).squared - quadrature_oracle(x, kind)) <= 1e-10


@pytest.mark.parametrize("kind", KINDS)
def test_three_dimensional_and_boundary_points(kind):
    rng = np.random.default_rng(9)
    x = rng.random((3, 3))
    x[0, 1] = 1.0
    x[1, 2] = 0.0
    x[2, 0] = x[1, 0]
    assert abs(l2_squared(x, kind).squared - quadrature_oracle(x, kind)) <= 1e-12


def test_extreme_against_numeric_double_integral():
    # independent route: integrate (count[p, q)/n - (q - p))^2 over p <= q with
    # scipy, one smooth piece per pair of coordinate cells
    xs = [0.37, 0.81]
    breaks = [0.0, *xs, 1.0]
    total = 0.0
    for i in range(3):
        for j in range(i, 3):
            count = sum(breaks[i + 1] <= x <= breaks[j] for x in xs) if j > i else 0
            lo, hi = breaks[j], breaks[j + 1]
            value, _ = integrate.dblquad(
                lambda q, p: (count / 2 - (q - p)) ** 2,
                breaks[i],
                breaks[i + 1],
                lambda p: max(p, lo),
                hi,
                epsabs=1e-13,
            )
            total += value
    assert l2_squared([[x] for x in xs], "l2-extreme").squared == pytest.approx(total, abs=1e-10)
    # a single point in d = 1 gives 1/12 wherever it sits
    assert l2_squared([[0.37]], "l2-extreme").squared == pytest.approx(1 / 12, abs=1e-16)


def test_midpoint_estimate_converges():
    x = np.random.default_rng(2).random((4, 2))
    exact = l2_squared(x, "l2-star").squared
    assert abs(midpoint_star_estimate(x, 400) - exact) < 5e-3


def test_cell_budget():
    with pytest.raises(TooExpensive):
        quadrature_oracle(np.random.default_rng(0).random((30, 4)), "l2-star", max_cells=1000)
