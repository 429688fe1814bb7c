"""County-level table ingestion.

Loads the four fixed-schema CSVs (monthly deaths, yearly population, yearly
demographics, county centroids), computes cumulative and per-capita series,
and assembles the 4-column spatiotemporal and 8-column demographic point
tables that the rest of the pipeline consumes.

Month indices are 0-based with origin January 2007 everywhere.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DataError, InputError

MONTH_ORIGIN_YEAR = 2007

SPATIOTEMPORAL_COLUMNS = (
    ("month", "months since 2007-01"),
    ("latitude", "deg"),
    ("longitude", "deg"),
)

DEMOGRAPHIC_COLUMNS = (
    ("year", "calendar year"),
    ("population", "persons"),
    ("pct_poverty", "%"),
    ("median_income", "USD"),
    ("pct_unemployed", "%"),
    ("pct_white", "%"),
    ("cumulative_deaths", "deaths"),
    ("normalized_cumulative_deaths", "deaths per person"),
)

DEMOGRAPHIC_FEATURES = ("pct_poverty", "median_income", "pct_unemployed", "pct_white")


def month_index(year: int, month: int) -> int:
    """Months since January 2007 (month is the 1-12 calendar month)."""
    return (year - MONTH_ORIGIN_YEAR) * 12 + (month - 1)


def format_month(index: int) -> str:
    """Render a month index as YYYY-MM for error messages."""
    return f"{MONTH_ORIGIN_YEAR + index // 12}-{index % 12 + 1:02d}"


@dataclass(frozen=True, order=True)
class RegionKey:
    """A county, identified by its 5-digit FIPS code plus a display name."""

    fips: str
    name: str = field(compare=False, default="")

    def __post_init__(self):
        if not self.fips:
            raise DataError("region key requires a non-empty fips code")


@dataclass(frozen=True)
class MonthlySeries:
    """Ordered monthly counts for one region, starting at `start_month`."""

    region: RegionKey
    start_month: int
    values: tuple[float, ...]

    def month_range(self) -> tuple[int, int]:
        return self.start_month, self.start_month + len(self.values) - 1


@dataclass(frozen=True)
class YearlySeries:
    """Ordered yearly values for one region, starting at `start_year`."""

    region: RegionKey
    start_year: int
    values: tuple[float, ...]

    def value_for(self, year: int) -> float:
        offset = year - self.start_year
        if offset < 0 or offset >= len(self.values):
            raise DataError(
                f"no value for region {self.region.fips} in year {year}"
            )
        return self.values[offset]

    def year_range(self) -> tuple[int, int]:
        return self.start_year, self.start_year + len(self.values) - 1


class RowMeta(NamedTuple):
    region: RegionKey
    time: int  # month index for monthly tables, calendar year for yearly ones


class PointTable:
    """An N x D real matrix with named columns and per-row (region, time) metadata."""

    def __init__(self, columns, rows, row_meta):
        self.columns: tuple[tuple[str, str], ...] = tuple(
            (str(n), str(u)) for n, u in columns
        )
        self.rows: np.ndarray = np.asarray(rows, dtype=float)
        if self.rows.ndim != 2:
            raise DataError("point table rows must be a 2-D matrix")
        self.row_meta: tuple[RowMeta, ...] = tuple(row_meta)
        names = [n for n, _ in self.columns]
        if len(set(names)) != len(names):
            raise DataError(f"duplicate column names: {names}")
        if self.rows.shape[1] != len(self.columns):
            raise DataError(
                f"{len(self.columns)} columns declared but matrix has {self.rows.shape[1]}"
            )
        if len(self.row_meta) != self.rows.shape[0]:
            raise DataError("every row needs metadata")
        if self.rows.size and not np.all(np.isfinite(self.rows)):
            raise DataError("point table contains NaN or infinite entries")
        self.rows.setflags(write=False)

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.columns)

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise DataError(f"unknown column {name!r}; have {list(self.column_names)}") from None

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.column_index(name)]

    def select(self, dims: Sequence[int]) -> "PointTable":
        """A new table restricted to the given column indices (metadata kept)."""
        cols = [self.columns[d] for d in dims]
        return PointTable(cols, self.rows[:, list(dims)], self.row_meta)

    def fingerprint(self) -> str:
        """Stable sha256 over column names, cell bytes, and row metadata."""
        h = hashlib.sha256()
        for name, unit in self.columns:
            h.update(name.encode())
            h.update(unit.encode())
        h.update(np.ascontiguousarray(self.rows).tobytes())
        for meta in self.row_meta:
            h.update(meta.region.fips.encode())
            h.update(str(meta.time).encode())
        return h.hexdigest()


def cumulative(series: MonthlySeries) -> MonthlySeries:
    """Running prefix sum of a monthly series; same region and start month."""
    if not series.values:
        raise DataError("empty input series")
    return MonthlySeries(
        region=series.region,
        start_month=series.start_month,
        values=tuple(np.cumsum(series.values).tolist()),
    )


def monthly_to_yearly_mean(series: MonthlySeries) -> YearlySeries:
    """Aggregate a monthly series to yearly means over complete calendar years."""
    if not series.values:
        raise DataError("empty input series")
    lo, hi = series.month_range()
    first_year = -(-lo // 12) + MONTH_ORIGIN_YEAR if lo % 12 else lo // 12 + MONTH_ORIGIN_YEAR
    values = []
    year = first_year
    while month_index(year, 12) <= hi:
        start = month_index(year, 1) - series.start_month
        values.append(float(np.mean(series.values[start:start + 12])))
        year += 1
    if not values:
        raise DataError(
            f"series for region {series.region.fips} covers no complete calendar year"
        )
    return YearlySeries(series.region, first_year, tuple(values))


def _broadcast_population(population: Iterable[YearlySeries]) -> dict[str, YearlySeries]:
    by_fips = {}
    for series in population:
        if series.region.fips in by_fips:
            raise DataError(f"duplicate population series for region {series.region.fips}")
        for v in series.values:
            if v <= 0:
                raise DataError(
                    f"population must be positive for region {series.region.fips}"
                )
        by_fips[series.region.fips] = series
    return by_fips


def _population_at(series: YearlySeries, year: int) -> float:
    # Years past the final observation carry that observation forward; interior
    # or leading gaps are a hard error.
    first, last = series.year_range()
    if year > last:
        return series.values[-1]
    if year < first:
        raise DataError(
            f"population for region {series.region.fips} does not cover year {year}"
        )
    return series.value_for(year)


def build_spatiotemporal_table(
    deaths: Sequence[MonthlySeries],
    centroids: Mapping[RegionKey, tuple[float, float]],
    population: Optional[Sequence[YearlySeries]] = None,
    normalize: bool = False,
) -> PointTable:
    """One row per (region, month): month index, latitude, longitude, cumulative deaths.

    With `normalize`, the cumulative column is divided by the region's yearly
    population, broadcast to the 12 months of that year.
    """
    if normalize and population is None:
        raise DataError("normalization requested but no population provided")
    centroid_by_fips = {key.fips: tuple(latlon) for key, latlon in centroids.items()}
    pop_by_fips = _broadcast_population(population) if population is not None else {}

    death_col = (
        ("normalized_cumulative_deaths", "deaths per person")
        if normalize
        else ("cumulative_deaths", "deaths")
    )
    matrix = []
    meta = []
    for series in sorted(deaths, key=lambda s: s.region.fips):
        region = series.region
        if region.fips not in centroid_by_fips:
            raise DataError(f"no centroid for region {region.fips} ({region.name})")
        lat, lon = centroid_by_fips[region.fips]
        if normalize and region.fips not in pop_by_fips:
            raise DataError(f"no population for region {region.fips} ({region.name})")
        cum = cumulative(series)
        for offset, value in enumerate(cum.values):
            m = series.start_month + offset
            if normalize:
                year = MONTH_ORIGIN_YEAR + m // 12
                value = value / _population_at(pop_by_fips[region.fips], year)
            matrix.append((float(m), lat, lon, value))
            meta.append(RowMeta(region, m))
    if not matrix:
        raise DataError("no death series provided")
    return PointTable(SPATIOTEMPORAL_COLUMNS + (death_col,), matrix, meta)


def build_demographic_table(
    demographics: Mapping[str, Sequence[YearlySeries]],
    deaths: Sequence[MonthlySeries],
    population: Sequence[YearlySeries],
    years: tuple[int, int] = (2009, 2023),
) -> PointTable:
    """One row per (region, year), 8 columns in DEMOGRAPHIC_COLUMNS order.

    Cumulative deaths at year Y run through December of Y, so the death series
    must cover through December of the final year.
    """
    first_year, last_year = years
    if last_year < first_year:
        raise DataError(f"invalid year span {years}")
    missing = [f for f in DEMOGRAPHIC_FEATURES if f not in demographics]
    if missing:
        raise DataError(f"missing demographic features: {missing}")

    pop_by_fips = _broadcast_population(population)
    features_by_fips: dict[str, dict[str, YearlySeries]] = {}
    for feature in DEMOGRAPHIC_FEATURES:
        per_region = {}
        for series in demographics[feature]:
            per_region[series.region.fips] = series
        features_by_fips[feature] = per_region

    cutoff = month_index(last_year, 12)
    matrix = []
    meta = []
    for series in sorted(deaths, key=lambda s: s.region.fips):
        region = series.region
        lo, hi = series.month_range()
        if hi < cutoff:
            raise DataError(
                f"deaths for region {region.fips} end at {format_month(hi)}, "
                f"before the {format_month(cutoff)} cutoff of year {last_year}"
            )
        if region.fips not in pop_by_fips:
            raise DataError(f"no population for region {region.fips} ({region.name})")
        cum = cumulative(series)
        for year in range(first_year, last_year + 1):
            row = [float(year)]
            pop = _population_at(pop_by_fips[region.fips], year)
            row.append(pop)
            for feature in DEMOGRAPHIC_FEATURES:
                series_for = features_by_fips[feature].get(region.fips)
                if series_for is None:
                    raise DataError(
                        f"no {feature} series for region {region.fips} ({region.name})"
                    )
                try:
                    row.append(series_for.value_for(year))
                except DataError:
                    raise DataError(
                        f"missing {feature} for region {region.fips} in year {year}"
                    ) from None
            end = month_index(year, 12)
            if end < lo:
                raise DataError(
                    f"deaths for region {region.fips} start at {format_month(lo)}, "
                    f"after December of year {year}"
                )
            cum_deaths = cum.values[end - series.start_month]
            row.append(cum_deaths)
            row.append(cum_deaths / pop)
            matrix.append(row)
            meta.append(RowMeta(region, year))
    if not matrix:
        raise DataError("no death series provided")
    return PointTable(DEMOGRAPHIC_COLUMNS, matrix, meta)


# ---------------------------------------------------------------------------
# CSV loaders. Schemas are fixed; no inference.
# ---------------------------------------------------------------------------

def _read_rows(path, expected_header):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InputError(f"{path}: empty file") from None
            if [h.strip() for h in header] != list(expected_header):
                raise InputError(
                    f"{path}: expected header {','.join(expected_header)!r}, "
                    f"got {','.join(header)!r}"
                )
            return list(reader)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _parse_num(path, line, field_name, raw, cast=float):
    try:
        return cast(raw)
    except ValueError:
        raise InputError(f"{path}: line {line}: bad {field_name} value {raw!r}") from None


def load_deaths(path) -> list[MonthlySeries]:
    """Parse deaths.csv (fips,name,year,month,deaths) into per-region monthly series.

    Every region must cover the file's full month range; genuinely absent
    (region, month) pairs are an error rather than an implicit zero.
    """
    rows = _read_rows(path, ("fips", "name", "year", "month", "deaths"))
    if not rows:
        raise InputError(f"{path}: no data rows")
    by_region: dict[str, dict[int, float]] = {}
    names: dict[str, str] = {}
    for i, row in enumerate(rows, start=2):
        if len(row) != 5:
            raise InputError(f"{path}: line {i}: expected 5 fields, got {len(row)}")
        fips, name, year_s, month_s, deaths_s = (f.strip() for f in row)
        year = _parse_num(path, i, "year", year_s, int)
        month = _parse_num(path, i, "month", month_s, int)
        if not 1 <= month <= 12:
            raise InputError(f"{path}: line {i}: month {month} out of range 1-12")
        deaths = _parse_num(path, i, "deaths", deaths_s)
        if deaths < 0:
            raise InputError(f"{path}: line {i}: negative deaths {deaths}")
        idx = month_index(year, month)
        region_months = by_region.setdefault(fips, {})
        if idx in region_months:
            raise InputError(
                f"{path}: line {i}: duplicate entry for region {fips}, {format_month(idx)}"
            )
        region_months[idx] = deaths
        names.setdefault(fips, name)
    lo = min(min(m) for m in by_region.values())
    hi = max(max(m) for m in by_region.values())
    series = []
    for fips in sorted(by_region):
        months = by_region[fips]
        for idx in range(lo, hi + 1):
            if idx not in months:
                raise DataError(
                    f"{path}: region {fips} ({names[fips]}) is missing {format_month(idx)}"
                )
        series.append(
            MonthlySeries(
                RegionKey(fips, names[fips]),
                lo,
                tuple(months[idx] for idx in range(lo, hi + 1)),
            )
        )
    return series


def _load_yearly(path, header, value_fields):
    rows = _read_rows(path, header)
    if not rows:
        raise InputError(f"{path}: no data rows")
    per_region: dict[str, dict[int, tuple[float, ...]]] = {}
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise InputError(f"{path}: line {i}: expected {len(header)} fields, got {len(row)}")
        fields = [f.strip() for f in row]
        fips = fields[0]
        year = _parse_num(path, i, "year", fields[header.index("year")], int)
        values = tuple(
            _parse_num(path, i, name, fields[header.index(name)]) for name in value_fields
        )
        years = per_region.setdefault(fips, {})
        if year in years:
            raise InputError(f"{path}: line {i}: duplicate year {year} for region {fips}")
        years[year] = values
    out: dict[str, tuple[int, list[tuple[float, ...]]]] = {}
    for fips in sorted(per_region):
        years = per_region[fips]
        lo, hi = min(years), max(years)
        for year in range(lo, hi + 1):
            if year not in years:
                raise DataError(f"{path}: region {fips} is missing year {year}")
        out[fips] = (lo, [years[y] for y in range(lo, hi + 1)])
    return out


def load_population(path) -> list[YearlySeries]:
    """Parse population.csv (fips,year,population)."""
    raw = _load_yearly(path, ("fips", "year", "population"), ("population",))
    return [
        YearlySeries(RegionKey(fips), start, tuple(v[0] for v in values))
        for fips, (start, values) in raw.items()
    ]


def load_demographics(path) -> dict[str, list[YearlySeries]]:
    """Parse demographics.csv into per-feature lists of yearly series."""
    header = ("fips", "year") + DEMOGRAPHIC_FEATURES
    raw = _load_yearly(path, header, DEMOGRAPHIC_FEATURES)
    out: dict[str, list[YearlySeries]] = {f: [] for f in DEMOGRAPHIC_FEATURES}
    for fips, (start, values) in raw.items():
        for j, feature in enumerate(DEMOGRAPHIC_FEATURES):
            out[feature].append(
                YearlySeries(RegionKey(fips), start, tuple(v[j] for v in values))
            )
    return out


def load_centroids(path) -> dict[RegionKey, tuple[float, float]]:
    """Parse centroids.csv (fips,name,lat,lon) into RegionKey -> (lat, lon)."""
    rows = _read_rows(path, ("fips", "name", "lat", "lon"))
    if not rows:
        raise InputError(f"{path}: no data rows")
    out = {}
    seen = set()
    for i, row in enumerate(rows, start=2):
        if len(row) != 4:
            raise InputError(f"{path}: line {i}: expected 4 fields, got {len(row)}")
        fips, name, lat_s, lon_s = (f.strip() for f in row)
        if fips in seen:
            raise InputError(f"{path}: line {i}: duplicate region {fips}")
        seen.add(fips)
        out[RegionKey(fips, name)] = (
            _parse_num(path, i, "lat", lat_s),
            _parse_num(path, i, "lon", lon_s),
        )
    return out
