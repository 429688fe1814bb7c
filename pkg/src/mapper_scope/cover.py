"""Cubical covers of projected point tables.

A cover is built per filter dimension from n equal-length intervals whose
consecutive overlap is the fraction p of an interval. Cover elements are the
axis-aligned products of one interval per dimension; element ids are 1-based
index tuples. Boxes are closed on both ends, so a point on a shared boundary
belongs to both elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CoverError
from .ingest import PointTable


def grid_geometry(lo: float, hi: float, n: int, p: float) -> tuple[float, float]:
    """Interval length and start-to-start stride for an n/p grid over [lo, hi]."""
    length = (hi - lo) / (n - (n - 1) * p)
    return length, length * (1.0 - p)


@dataclass(frozen=True)
class FilterSpec:
    """Projection onto an ordered subset of table columns."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if not self.dims:
            raise CoverError("filter needs at least one dimension")
        if len(set(self.dims)) != len(self.dims):
            raise CoverError(f"filter dimensions must be distinct: {self.dims}")

    @classmethod
    def from_columns(cls, table: PointTable, names: Sequence[str]) -> "FilterSpec":
        return cls(tuple(table.column_index(n) for n in names))

    def validate(self, table: PointTable) -> None:
        for d in self.dims:
            if not 0 <= d < len(table.columns):
                raise CoverError(f"filter dimension {d} out of range for table")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise CoverError(f"degenerate interval [{self.lo}, {self.hi}]")

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class CoverParams:
    n: int
    p: float

    def __post_init__(self):
        if self.n < 1:
            raise CoverError(f"interval count must be >= 1, got {self.n}")
        if not 0.0 <= self.p < 1.0:
            raise CoverError(f"overlap fraction must lie in [0, 1), got {self.p}")


@dataclass(frozen=True)
class CoverElement:
    """One box of the cover: a 1-based index tuple and its per-dim intervals."""

    id: tuple[int, ...]
    box: tuple[Interval, ...]

    def contains(self, point: Sequence[float]) -> bool:
        return all(v in iv for v, iv in zip(point, self.box))


def interval_grid(lo: float, hi: float, n: int, p: float) -> list[Interval]:
    """n equal-length intervals over [lo, hi] with consecutive overlap fraction p.

    Interval length is (hi - lo) / (n - (n - 1) p) and consecutive starts are
    one length times (1 - p) apart; the first and last endpoints are snapped
    exactly to lo and hi.
    """
    if not hi > lo:
        raise CoverError(f"degenerate range [{lo}, {hi}]")
    CoverParams(n, p)  # reuse the parameter validation
    length, stride = grid_geometry(lo, hi, n, p)
    starts = [lo + j * stride for j in range(n)]
    starts[0] = lo
    # Ends come from the next start plus the overlap length, so consecutive
    # intervals meet or overlap exactly even under float rounding.
    overlap = length * p
    bounds = [(starts[j], starts[j + 1] + overlap) for j in range(n - 1)]
    bounds.append((starts[-1], hi))
    return [Interval(a, b) for a, b in bounds]


class CubicalCover:
    """Fitted interval grids for each filter dimension of a table."""

    def __init__(self, params: CoverParams, ranges, intervals):
        self.params = params
        self.ranges: tuple[tuple[float, float], ...] = tuple(ranges)
        self.intervals: tuple[tuple[Interval, ...], ...] = tuple(
            tuple(per_dim) for per_dim in intervals
        )

    @property
    def dim(self) -> int:
        return len(self.ranges)

    def element_count(self) -> int:
        return self.params.n ** self.dim

    def element(self, element_id: tuple[int, ...]) -> CoverElement:
        if len(element_id) != self.dim or any(
            not 1 <= j <= self.params.n for j in element_id
        ):
            raise CoverError(f"element id {element_id} not in this cover")
        return CoverElement(
            tuple(element_id),
            tuple(self.intervals[d][j - 1] for d, j in enumerate(element_id)),
        )

    def elements(self) -> Iterator[CoverElement]:
        """All candidate elements in lexicographic id order (empty ones included)."""
        ids = [()]
        for _ in range(self.dim):
            ids = [prefix + (j,) for prefix in ids for j in range(1, self.params.n + 1)]
        for element_id in ids:
            yield self.element(element_id)

    def dim_memberships(self, dim: int, values: np.ndarray) -> list[tuple[int, ...]]:
        """Per value, the 1-based interval indices along one dimension containing it."""
        lo, hi = self.ranges[dim]
        n, p = self.params.n, self.params.p
        length, stride = grid_geometry(lo, hi, n, p)
        values = np.asarray(values, dtype=float)
        j_lo = np.ceil((values - lo - length) / stride).astype(int)
        j_hi = np.floor((values - lo) / stride).astype(int)
        j_lo = np.clip(j_lo - 1, 0, n - 1)  # widen by one to absorb rounding
        j_hi = np.clip(j_hi + 1, 0, n - 1)
        out = []
        per_dim = self.intervals[dim]
        for value, a, b in zip(values, j_lo, j_hi):
            hits = tuple(
                j + 1 for j in range(a, b + 1) if per_dim[j].lo <= value <= per_dim[j].hi
            )
            out.append(hits)
        return out

    def row_memberships(self, table: PointTable, filt: FilterSpec) -> list[tuple[tuple[int, ...], ...]]:
        """Per table row, the ids of every cover element whose closed box contains it."""
        per_dim = [
            self.dim_memberships(d, table.rows[:, dim]) for d, dim in enumerate(filt.dims)
        ]
        out = []
        for row in range(len(table)):
            ids = [()]
            for d in range(self.dim):
                hits = per_dim[d][row]
                ids = [prefix + (j,) for prefix in ids for j in hits]
            out.append(tuple(ids))
        return out


def fit_cover(table: PointTable, filt: FilterSpec, params: CoverParams) -> CubicalCover:
    """Fit interval grids to the observed ranges of the filter columns."""
    if len(table) == 0:
        raise CoverError("cannot fit a cover to an empty table")
    filt.validate(table)
    ranges = []
    intervals = []
    for d in filt.dims:
        col = table.rows[:, d]
        lo, hi = float(col.min()), float(col.max())
        if not lo < hi:
            raise CoverError(
                f"degenerate filter dimension: column {table.columns[d][0]!r} is constant"
            )
        ranges.append((lo, hi))
        intervals.append(interval_grid(lo, hi, params.n, params.p))
    return CubicalCover(params, ranges, intervals)


def preimage(
    cover: CubicalCover,
    element: CoverElement,
    table: PointTable,
    filt: FilterSpec,
) -> set[int]:
    """Row indices whose projection lies inside the element's closed box."""
    cover.element(element.id)  # raises if the id does not belong to this cover
    mask = np.ones(len(table), dtype=bool)
    for interval, dim in zip(element.box, filt.dims):
        col = table.rows[:, dim]
        mask &= (col >= interval.lo) & (col <= interval.hi)
    return set(np.nonzero(mask)[0].tolist())
