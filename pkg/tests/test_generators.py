import math

import numpy as np
import pytest
from scipy.stats import qmc

from lowdisc.generators import (
    GOLDEN_RATIO,
    DimensionUnsupported,
    IndexTooLarge,
    SobolParams,
    default_sobol_table,
    fibonacci_index_for,
    fibonacci_integration_lattice,
    fibonacci_number,
    fibonacci_set,
    kronecker_lattice,
    parse_joe_kuo,
    random_set,
    sobol_set,
)


def test_kronecker_rows():
    ps = kronecker_lattice(4, math.sqrt(2))
    assert ps.coords[0].tolist() == [0.0, 0.0]
    assert ps.coords[1, 0] == 0.25
    assert ps.coords[1, 1] == pytest.approx(math.sqrt(2) - 1)
    assert ps.coords[3, 1] == pytest.approx(3 * math.sqrt(2) - 4)


def test_fibonacci_is_golden_kronecker():
    assert fibonacci_set(260) == kronecker_lattice(260, GOLDEN_RATIO)
    assert fibonacci_set(1).coords.tolist() == [[0.0, 0.0]]


def test_fibonacci_numbers():
    assert [fibonacci_number(k) for k in range(1, 14)] == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233]
    assert fibonacci_index_for(233) == 13
    assert fibonacci_index_for(234) is None


def test_integration_lattice_exact():
    ps = fibonacci_integration_lattice(13)
    assert ps.n == 233
    # every coordinate is the correctly rounded value of an integer ratio
    expected = [[i / 233, (144 * i % 233) / 233] for i in range(233)]
    assert ps.coords.tolist() == expected
    assert sorted(round(y * 233) for y in ps.coords[:, 1]) == list(range(233))


def test_integration_lattice_limits():
    assert fibonacci_number(92) < 2**63 <= fibonacci_number(93)
    with pytest.raises(IndexTooLarge):
        fibonacci_integration_lattice(93)


def test_sobol_first_points():
    ps = sobol_set(4, SobolParams(2))
    assert ps.coords.tolist() == [[0, 0], [0.5, 0.5], [0.75, 0.25], [0.25, 0.75]]


@pytest.mark.parametrize("n,d", [(64, 2), (50, 3), (256, 5), (100, 16)])
def test_sobol_matches_independent_generator(n, d):
    # scipy's unscrambled Sobol' uses the same Joe-Kuo table and Gray-code order
    ref = qmc.Sobol(d, scramble=False).random(n)
    assert np.array_equal(sobol_set(n, SobolParams(d)).coords, ref)


def test_sobol_skip():
    full = sobol_set(20, SobolParams(3)).coords
    assert np.array_equal(sobol_set(15, SobolParams(3, skip=5)).coords, full[5:])


def test_sobol_net_property():
    # the first 2^m points hit every elementary interval of volume 2^-m once (t = 0 in d = 2)
    pts = sobol_set(64, SobolParams(2)).coords
    for a in range(7):
        b = 6 - a
        cells = {(int(x * 2**a), int(y * 2**b)) for x, y in pts}
        assert len(cells) == 64


def test_sobol_dimension_limit():
    table = default_sobol_table()
    assert table.max_dim == 1024
    with pytest.raises(DimensionUnsupported):
        sobol_set(2, SobolParams(table.max_dim + 1))


def test_custom_direction_numbers():
    text = "d s a m_i\n2 1 0 1\n3 2 1 1 3\n"
    table = parse_joe_kuo(text, "tiny")
    assert table.max_dim == 3
    assert sobol_set(8, SobolParams(3, table=table)) == sobol_set(8, SobolParams(3))
    with pytest.raises(ValueError):
        parse_joe_kuo("2 1 0 2\n")


def test_random_set_deterministic():
    a = random_set(260, 2, 7)
    assert a == random_set(260, 2, 7)
    assert a != random_set(260, 2, 8)
    assert ((a.coords >= 0) & (a.coords < 1)).all()


@pytest.mark.parametrize("n,d", [(260, 2), (40, 3)])
def test_random_set_matches_expected_l2_star(n, d):
    # for i.i.d. uniform points E[D^2] = (2^-d - 3^-d) / n exactly
    from lowdisc.l2 import l2_squared

    values = np.array([l2_squared(random_set(n, d, seed), "l2-star").squared for seed in range(400)])
    expected = (2.0**-d - 3.0**-d) / n
    assert abs(values.mean() - expected) <= 4 * values.std(ddof=1) / math.sqrt(len(values))
