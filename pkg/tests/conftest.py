"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

# filled by tests/test_acceptance.py, printed once at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="also run long reproduction checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="long-running; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def naive_linf_star(x: np.ndarray) -> float:
    """Brute force over every corner of the critical grid.

    The grid on axis k is the distinct k-th coordinates plus 1.  At each
    corner both the half-open box (strict count) and the closed box
    (non-strict count) are scored.
    """
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    grids = [sorted(set(x[:, k].tolist()) | {1.0}) for k in range(d)]
    best = 0.0
    for q in itertools.product(*grids):
        q = np.array(q)
        vol = float(np.prod(q))
        below = int(np.all(x < q, axis=1).sum())
        upto = int(np.all(x <= q, axis=1).sum())
        best = max(best, vol - below / n, upto / n - vol)
    return best


def local_loss_longdouble(x: np.ndarray, i: int, kind: str, tau: float) -> np.longdouble:
    """Terms of the smoothed loss that depend on point ``i``, in extended precision.

    Written from the closed forms directly so it shares no code with the
    library: single-point term of ``i`` plus ``(2 * sum_j p_ij - p_ii) / n^2``.
    """
    x = np.asarray(x, dtype=np.longdouble)
    n, d = x.shape
    tau = np.longdouble(tau)
    xi = x[i]
    diff = xi[None, :] - x
    root = np.sqrt(diff * diff + tau)
    if kind == "l2-star":
        f = 1 - (xi[None, :] + x + root) / 2
        single = -(np.longdouble(2) ** (1 - d)) / n * np.prod(1 - xi * xi)
    elif kind == "l2-periodic":
        f = np.longdouble(0.5) - root + diff * diff
        single = np.longdouble(0)
    else:
        lo = (xi[None, :] + x - root) / 2
        hi = (xi[None, :] + x + root) / 2
        f = lo * (1 - hi)
        single = -np.longdouble(2) / n * np.prod(xi * (1 - xi) / 2)
    pair = np.prod(f, axis=1)
    return single + (2 * pair.sum() - pair[i]) / (n * n)


def fd_gradient(x: np.ndarray, kind: str, tau: float, h: float = 1e-6) -> np.ndarray:
    """Central differences of :func:`local_loss_longdouble`, step ``h``."""
    x = np.asarray(x, dtype=np.longdouble)
    out = np.zeros(x.shape)
    for i in range(x.shape[0]):
        for k in range(x.shape[1]):
            up = x.copy()
            dn = x.copy()
            up[i, k] += h
            dn[i, k] -= h
            out[i, k] = float(
                (local_loss_longdouble(up, i, kind, tau) - local_loss_longdouble(dn, i, kind, tau)) / (2 * h)
            )
    return out


def separated_random_set(rng, n: int, d: int, gap: float) -> np.ndarray:
    """Uniform random set whose coordinates on every axis are at least ``gap`` apart.

    Central differences with step h straddle the kink of max/min/abs whenever
    two coordinates on one axis are closer than h, so the finite-difference
    oracle is only valid on such sets.
    """
    while True:
        x = rng.random((n, d))
        if n == 1 or min(np.diff(np.sort(x[:, k])).min() for k in range(d)) >= gap:
            return x


def max_relative_error(g: np.ndarray, ref: np.ndarray) -> float:
    scale = np.maximum(np.abs(g), np.abs(ref))
    err = np.abs(g - ref)
    rel = np.divide(err, scale, out=np.zeros_like(err), where=scale > 0)
    return float(rel.max())
