"""Point sets in the closed unit cube, discrepancy kinds, errors and text I/O."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np


class DiscrepancyError(Exception):
    """Base class for every error raised by this package."""


class OutOfUnitCube(DiscrepancyError, ValueError):
    def __init__(self, index: tuple[int, int], value: float):
        self.index = index
        self.value = value
        super().__init__(f"coordinate {index} = {value!r} lies outside [0, 1]")


class RaggedInput(DiscrepancyError, ValueError):
    pass


class ParseError(DiscrepancyError, ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class KindUnsupported(DiscrepancyError, ValueError):
    pass


class DiscrepancyKind(enum.Enum):
    L2_STAR = "l2-star"
    L2_PERIODIC = "l2-periodic"
    L2_EXTREME = "l2-extreme"
    LINF_STAR = "linf-star"

    @classmethod
    def parse(cls, name: Union[str, "DiscrepancyKind"]) -> "DiscrepancyKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise KindUnsupported(
            f"unknown discrepancy kind {name!r}; expected one of "
            + ", ".join(k.value for k in cls)
        )

    @property
    def is_l2(self) -> bool:
        return self is not DiscrepancyKind.LINF_STAR

    def __str__(self) -> str:
        return self.value


L2_KINDS = (DiscrepancyKind.L2_STAR, DiscrepancyKind.L2_PERIODIC, DiscrepancyKind.L2_EXTREME)


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered multiset of ``n`` points in ``[0, 1]^d``.

    The coordinate array is copied on construction and marked read-only,
    so instances can be shared freely.  Use :func:`make_point_set` (or the
    constructor) to validate arbitrary input.
    """

    coords: np.ndarray

    def __post_init__(self):
        arr = _validated(self.coords)
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.coords
        return self.coords.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(
            np.array_equal(self.coords, other.coords)
        )

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, d={self.d})"


def _validated(coords) -> np.ndarray:
    if isinstance(coords, np.ndarray):
        arr = np.array(coords, dtype=np.float64, copy=True)
    else:
        rows = list(coords)
        if rows and all(np.ndim(r) == 1 for r in rows):
            lengths = {len(r) for r in rows}
            if len(lengths) > 1:
                raise RaggedInput(f"rows have differing lengths {sorted(lengths)}")
        try:
            arr = np.array(rows, dtype=np.float64)
        except ValueError as exc:
            raise RaggedInput(str(exc)) from None
    if arr.ndim == 1 and arr.size:
        raise RaggedInput("expected a 2-D array of shape (n, d); got a 1-D array")
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise RaggedInput(f"expected a non-empty (n, d) array; got shape {arr.shape}")
    bad = ~((arr >= 0.0) & (arr <= 1.0))  # also catches NaN
    if bad.any():
        i, k = (int(v) for v in np.argwhere(bad)[0])
        raise OutOfUnitCube((i, k), float(arr[i, k]))
    return arr


def make_point_set(coords) -> PointSet:
    """Validate an ``n x d`` array-like and wrap it.

    Coordinates outside ``[0, 1]`` raise :class:`OutOfUnitCube`; they are
    never clamped.
    """
    return PointSet(coords)


PointsLike = Union[PointSet, np.ndarray, Sequence[Sequence[float]]]


def as_array(points: PointsLike) -> np.ndarray:
    """Return the coordinate array of ``points`` without re-validating arrays."""
    if isinstance(points, PointSet):
        return points.coords
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise RaggedInput(f"expected a non-empty (n, d) array; got shape {arr.shape}")
    return arr


def format_float(value: float) -> str:
    """Shortest decimal string that round-trips a binary64 value (<= 17 digits)."""
    text = repr(float(value))
    if text.endswith(".0"):
        text = text[:-2]
    return text


def parse_point_lines(lines: Iterable[str]) -> PointSet:
    rows: list[list[float]] = []
    width = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.replace(",", " ").split()
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise ParseError(lineno, f"cannot parse {line!r} as numbers") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise RaggedInput(f"line {lineno}: expected {width} coordinates, found {len(row)}")
        rows.append(row)
    if not rows:
        raise ParseError(0, "no points found")
    return PointSet(np.array(rows, dtype=np.float64))


def load_point_set(path: Union[str, os.PathLike]) -> PointSet:
    """Read a point set: one point per line, space or comma separated, '#' comments."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_point_lines(fh)


def dumps_point_set(points: PointsLike, header: Iterable[str] = ()) -> str:
    coords = as_array(points)
    out = [f"# {h}" for h in header]
    out.extend(" ".join(format_float(c) for c in row) for row in coords)
    return "\n".join(out) + "\n"


def save_point_set(points: PointsLike, path: Union[str, os.PathLike], header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_point_set(points, header))
