"""Initial point sets: Kronecker lattices, Fibonacci lattices, Sobol' prefixes, uniform random."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

import numpy as np

from .core import DiscrepancyError, PointSet

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

DEFAULT_SOBOL_TABLE = "new-joe-kuo-6.1024"
RANDOM_GENERATOR = "numpy.random.Philox"

_SOBOL_BITS = 52


class DimensionUnsupported(DiscrepancyError, ValueError):
    pass


class IndexTooLarge(DiscrepancyError, ValueError):
    pass


def kronecker_lattice(n: int, alpha: float) -> PointSet:
    """The two-dimensional set ``{(i/n, {alpha * i}) : 0 <= i < n}``."""
    if n < 1:
        raise ValueError("n must be positive")
    i = np.arange(n, dtype=np.float64)
    second = np.mod(alpha * i, 1.0)
    return PointSet(np.column_stack([i / n, second]))


def fibonacci_set(n: int) -> PointSet:
    """Kronecker lattice with golden-ratio slope, ``{(i/n, {phi * i})}``."""
    return kronecker_lattice(n, GOLDEN_RATIO)


def fibonacci_number(k: int) -> int:
    """``F_k`` with ``F_1 = F_2 = 1``."""
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def fibonacci_integration_lattice(k: int) -> PointSet:
    """Rank-1 lattice ``{(i/F_k, (F_{k-1} i mod F_k)/F_k)}`` with exact integer arithmetic.

    Parameters
    ----------
    k : int
        Fibonacci index, ``2 <= k <= 92`` so that ``F_k`` fits in a signed
        64-bit integer.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > 92:
        raise IndexTooLarge(f"F_{k} does not fit in 64-bit integers (k <= 92)")
    fk = fibonacci_number(k)
    fk1 = fibonacci_number(k - 1)
    i = np.arange(fk, dtype=np.int64)
    # Python ints avoid overflow in F_{k-1} * i for large k
    second = np.array([(fk1 * int(j)) % fk for j in i], dtype=np.float64) / fk
    return PointSet(np.column_stack([i.astype(np.float64) / fk, second]))


def fibonacci_index_for(n: int) -> Optional[int]:
    """Return ``k`` with ``F_k == n`` (the larger index for ``n == 1``), else None."""
    k = 2
    while fibonacci_number(k) < n:
        k += 1
    return k if fibonacci_number(k) == n else None


@dataclass(frozen=True)
class SobolTable:
    """Primitive polynomials and initial direction numbers in Joe-Kuo layout.

    Row ``j`` of ``degree``/``coeffs``/``m`` describes dimension ``j + 2``;
    dimension 1 is the van der Corput axis and needs no entry.
    """

    name: str
    degree: tuple[int, ...]
    coeffs: tuple[int, ...]
    m: tuple[tuple[int, ...], ...]

    @property
    def max_dim(self) -> int:
        return len(self.degree) + 1


def parse_joe_kuo(text: str, name: str = "custom") -> SobolTable:
    degree, coeffs, m = [], [], []
    expected = 2
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields or not fields[0].isdigit():
            continue
        dim, s, a = int(fields[0]), int(fields[1]), int(fields[2])
        mi = tuple(int(f) for f in fields[3:])
        if dim != expected:
            raise ValueError(f"line {lineno}: expected dimension {expected}, found {dim}")
        if len(mi) != s:
            raise ValueError(f"line {lineno}: degree {s} needs {s} direction numbers, found {len(mi)}")
        for j, v in enumerate(mi, start=1):
            if v % 2 == 0 or v >= 2**j:
                raise ValueError(f"line {lineno}: m_{j} = {v} must be odd and < 2^{j}")
        degree.append(s)
        coeffs.append(a)
        m.append(mi)
        expected += 1
    return SobolTable(name, tuple(degree), tuple(coeffs), tuple(m))


@lru_cache(maxsize=None)
def default_sobol_table() -> SobolTable:
    text = resources.files("lowdisc").joinpath(f"data/{DEFAULT_SOBOL_TABLE}.txt").read_text()
    return parse_joe_kuo(text, DEFAULT_SOBOL_TABLE)


def load_sobol_table(path: str) -> SobolTable:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_joe_kuo(fh.read(), os.path.basename(path))


@dataclass(frozen=True)
class SobolParams:
    d: int
    skip: int = 0
    table: Optional[SobolTable] = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.skip < 0:
            raise ValueError("skip must be non-negative")

    @property
    def resolved_table(self) -> SobolTable:
        return self.table if self.table is not None else default_sobol_table()


def _direction_integers(table: SobolTable, d: int) -> np.ndarray:
    """Direction integers ``V[k, j]`` scaled to ``_SOBOL_BITS`` bits."""
    L = _SOBOL_BITS
    V = np.zeros((d, L), dtype=np.uint64)
    for j in range(L):
        V[0, j] = 1 << (L - 1 - j)
    for k in range(1, d):
        s = table.degree[k - 1]
        a = table.coeffs[k - 1]
        m = list(table.m[k - 1])
        for j in range(s, L):
            new = m[j - s] ^ (m[j - s] << s)
            for r in range(1, s):
                if (a >> (s - 1 - r)) & 1:
                    new ^= m[j - r] << r
            m.append(new)
        for j in range(L):
            V[k, j] = m[j] << (L - 1 - j)
    return V


def sobol_set(n: int, params: SobolParams) -> PointSet:
    """First ``n`` points (after ``params.skip``) of the unscrambled Sobol' sequence.

    Points are produced in Gray-code order, so prefixes of length ``2^m``
    coincide with the natural-order net.
    """
    if n < 1:
        raise ValueError("n must be positive")
    table = params.resolved_table
    d = params.d
    if d > table.max_dim:
        raise DimensionUnsupported(f"table {table.name} supports d <= {table.max_dim}, got {d}")
    total = params.skip + n
    if total > 2**_SOBOL_BITS:
        raise ValueError("sequence index exceeds generator precision")
    V = _direction_integers(table, d)
    out = np.empty((n, d), dtype=np.float64)
    state = np.zeros(d, dtype=np.uint64)
    scale = 2.0**-_SOBOL_BITS
    for i in range(total):
        if i >= params.skip:
            out[i - params.skip] = state.astype(np.float64) * scale
        # flip the direction integer of the lowest zero bit of i
        c = ((~i) & (i + 1)).bit_length() - 1
        state ^= V[:, c]
    return PointSet(out)


def random_set(n: int, d: int, seed: int) -> PointSet:
    """``n * d`` i.i.d. uniform coordinates in ``[0, 1)`` from a seeded Philox stream."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    return PointSet(rng.random((n, d)))
