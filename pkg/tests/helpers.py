"""Shared fixture builders: synthetic county chains, ring clouds, toy graphs."""

from __future__ import annotations

import csv
import os

import numpy as np

from mapper_scope import (
    ClusterParams,
    CoverParams,
    MapperEdge,
    MapperGraph,
    MapperNode,
    MonthlySeries,
    PointTable,
    RegionKey,
    YearlySeries,
    build_demographic_table,
    build_spatiotemporal_table,
)
from mapper_scope.ingest import RowMeta
from mapper_scope.nerve import Provenance

CHAIN_COUNT = 88
CHAIN_MONTHS = 213
CITY_INDICES = (9, 27, 45, 63, 81)
CITY_SCALE = 0.008
CITY_ONSET = 60


def chain_fips(k: int) -> str:
    return f"39{2 * k + 1:03d}"

CITY_FIPS = tuple(chain_fips(k) for k in CITY_INDICES)


def chain_centroids(count: int = CHAIN_COUNT) -> dict[RegionKey, tuple[float, float]]:
    """A contiguous diagonal chain of county centroids, one unit apart per axis."""
    return {
        RegionKey(chain_fips(k), f"County {2 * k + 1}"): (float(k), float(k))
        for k in range(count)
    }


def city_monthly_deaths(months: int, scale: float = CITY_SCALE, onset: int = CITY_ONSET) -> list[float]:
    """Monthly increments whose cumulative sum is scale * max(0, m - onset)^2."""
    m = np.arange(months, dtype=float)
    cum = scale * np.maximum(0.0, m - onset) ** 2
    return np.diff(np.concatenate([[0.0], cum])).tolist()


def chain_death_series(
    months: int = CHAIN_MONTHS,
    count: int = CHAIN_COUNT,
    cities: tuple[int, ...] = (),
    scale: float = CITY_SCALE,
    onset: int = CITY_ONSET,
) -> list[MonthlySeries]:
    series = []
    for k in range(count):
        if k in cities:
            values = city_monthly_deaths(months, scale, onset)
        else:
            values = [0.0] * months
        series.append(MonthlySeries(RegionKey(chain_fips(k), f"County {2 * k + 1}"), 0, tuple(values)))
    return series


def chain_table(months: int = CHAIN_MONTHS, count: int = CHAIN_COUNT, cities: tuple[int, ...] = ()) -> PointTable:
    return build_spatiotemporal_table(
        chain_death_series(months, count, cities), chain_centroids(count)
    )


# Small, fast variant for CLI round trips: connected at (n=6, p=0.30), eps 3.
MINI_MONTHS = 36
MINI_COUNT = 24
MINI_CITIES = (5, 12, 19)
MINI_SCALE = 0.03
MINI_ONSET = 9
MINI_COVER = (6, 0.30)


CHAIN_CLUSTER = ClusterParams(eps=3.0, min_samples=1)


def annulus_table(points: int = 400, seed: int = 7) -> PointTable:
    """Points on a ring of radius ~1 with small radial jitter; columns (x, y)."""
    rng = np.random.default_rng(seed)
    theta = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    radius = 1.0 + rng.uniform(-0.02, 0.02, points)
    xy = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    region = RegionKey("00000", "Ring")
    meta = [RowMeta(region, i) for i in range(points)]
    return PointTable((("x", "unit"), ("y", "unit")), xy, meta)


ANNULUS_CLUSTER = ClusterParams(eps=0.1, min_samples=1)

STRATA_POPULATIONS = (50_000.0, 200_000.0, 350_000.0, 500_000.0, 650_000.0)


def strata_demographic_table(regions_per_stratum: int = 4) -> PointTable:
    """Several population strata far enough apart that no cover element spans two."""
    years = (2009, 2023)
    span = years[1] - years[0] + 1
    demographics = {f: [] for f in ("pct_poverty", "median_income", "pct_unemployed", "pct_white")}
    deaths = []
    population = []
    k = 0
    for stratum, pop in enumerate(STRATA_POPULATIONS):
        for _ in range(regions_per_stratum):
            region = RegionKey(f"39{2 * k + 1:03d}", f"County {2 * k + 1}")
            demographics["pct_poverty"].append(
                YearlySeries(region, years[0], tuple(10.0 + 0.01 * k for _ in range(span)))
            )
            demographics["median_income"].append(
                YearlySeries(region, years[0], tuple(50_000.0 + 0.1 * k for _ in range(span)))
            )
            demographics["pct_unemployed"].append(
                YearlySeries(region, years[0], tuple(5.0 + 0.01 * k for _ in range(span)))
            )
            demographics["pct_white"].append(
                YearlySeries(region, years[0], tuple(80.0 + 0.01 * k for _ in range(span)))
            )
            population.append(YearlySeries(region, years[0], tuple(pop for _ in range(span))))
            months = (years[1] - 2007 + 1) * 12
            deaths.append(MonthlySeries(region, 0, tuple(0.1 for _ in range(months))))
            k += 1
    return build_demographic_table(demographics, deaths, population, years=years)


STRATA_CLUSTER = ClusterParams(eps=5.0, min_samples=1)
STRATA_COVER = CoverParams(9, 0.45)


def toy_graph(node_count: int, edges, members=None) -> MapperGraph:
    """A MapperGraph with synthetic provenance; members defaults to {i} per node."""
    nodes = [
        MapperNode(i, (i + 1,), 0, frozenset(members[i]) if members else frozenset({i}))
        for i in range(node_count)
    ]
    edge_objs = [MapperEdge(min(a, b), max(a, b), 1) for a, b in sorted(set(edges))]
    provenance = Provenance((0,), CoverParams(2, 0.1), ClusterParams(1.0, 1), "toy")
    return MapperGraph(nodes, edge_objs, provenance)


def toy_table(rows: int, regions=None, times=None, values=None) -> PointTable:
    """A single-column table whose metadata the composition helpers can chew on."""
    meta = []
    for i in range(rows):
        fips = regions[i] if regions else "00001"
        meta.append(RowMeta(RegionKey(fips, f"Region {fips}"), times[i] if times else i))
    column = values if values is not None else list(range(rows))
    return PointTable((("value", "unit"),), np.asarray(column, float)[:, None], meta)


def write_chain_csvs(
    directory: str,
    months: int = MINI_MONTHS,
    count: int = MINI_COUNT,
    cities: tuple[int, ...] = (),
    scale: float = MINI_SCALE,
    onset: int = MINI_ONSET,
    population: float = 10_000.0,
) -> dict[str, str]:
    """Write deaths/centroids/population CSVs for a chain; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    paths = {
        "deaths": os.path.join(directory, "deaths.csv"),
        "centroids": os.path.join(directory, "centroids.csv"),
        "population": os.path.join(directory, "population.csv"),
    }
    series = chain_death_series(months, count, cities, scale, onset)
    with open(paths["deaths"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fips", "name", "year", "month", "deaths"])
        for s in series:
            for offset, value in enumerate(s.values):
                idx = s.start_month + offset
                writer.writerow(
                    [s.region.fips, s.region.name, 2007 + idx // 12, idx % 12 + 1, value]
                )
    with open(paths["centroids"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fips", "name", "lat", "lon"])
        for key, (lat, lon) in sorted(chain_centroids(count).items()):
            writer.writerow([key.fips, key.name, lat, lon])
    last_year = 2007 + (months - 1) // 12
    with open(paths["population"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fips", "year", "population"])
        for key in sorted(chain_centroids(count)):
            for year in range(2007, last_year + 1):
                writer.writerow([key.fips, year, population])
    return paths


def write_strata_csvs(directory: str, regions_per_stratum: int = 4) -> dict[str, str]:
    """CSVs matching strata_demographic_table: deaths, population, demographics."""
    os.makedirs(directory, exist_ok=True)
    paths = {
        "deaths": os.path.join(directory, "deaths.csv"),
        "population": os.path.join(directory, "population.csv"),
        "demographics": os.path.join(directory, "demographics.csv"),
    }
    months = (2023 - 2007 + 1) * 12
    regions = []
    k = 0
    for pop in STRATA_POPULATIONS:
        for _ in range(regions_per_stratum):
            regions.append((f"39{2 * k + 1:03d}", f"County {2 * k + 1}", pop, k))
            k += 1
    with open(paths["deaths"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fips", "name", "year", "month", "deaths"])
        for fips, name, _, _ in regions:
            for idx in range(months):
                writer.writerow([fips, name, 2007 + idx // 12, idx % 12 + 1, 0.1])
    with open(paths["population"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fips", "year", "population"])
        for fips, _, pop, _ in regions:
            for year in range(2009, 2024):
                writer.writerow([fips, year, pop])
    with open(paths["demographics"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fips", "year", "pct_poverty", "median_income", "pct_unemployed", "pct_white"])
        for fips, _, _, k in regions:
            for year in range(2009, 2024):
                writer.writerow(
                    [fips, year, 10.0 + 0.01 * k, 50_000.0 + 0.1 * k, 5.0 + 0.01 * k, 80.0 + 0.01 * k]
                )
    return paths
