"""Declarative run configuration.

A run is described by one YAML document; validation reports the dotted path of
the offending field. Exactly one of a fixed `cover` block or a `calibrate`
block must be present.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import yaml

from .errors import ConfigError
from .ingest import DEMOGRAPHIC_COLUMNS, SPATIOTEMPORAL_COLUMNS

SPATIOTEMPORAL_KINDS = ("spatiotemporal", "spatiotemporal-normalized")
DEMOGRAPHIC_KINDS = ("demographic", "demographic+deaths", "demographic+normalized-deaths")
DATASET_KINDS = SPATIOTEMPORAL_KINDS + DEMOGRAPHIC_KINDS

_DEMOGRAPHIC_BASE = [name for name, _ in DEMOGRAPHIC_COLUMNS[:6]]

DEFAULT_FILTERS = {
    "spatiotemporal": [name for name, _ in SPATIOTEMPORAL_COLUMNS] + ["cumulative_deaths"],
    "spatiotemporal-normalized": [name for name, _ in SPATIOTEMPORAL_COLUMNS]
    + ["normalized_cumulative_deaths"],
    "demographic": list(_DEMOGRAPHIC_BASE),
    "demographic+deaths": _DEMOGRAPHIC_BASE + ["cumulative_deaths"],
    "demographic+normalized-deaths": _DEMOGRAPHIC_BASE + ["normalized_cumulative_deaths"],
}

COLUMNS_BY_KIND = {
    "spatiotemporal": DEFAULT_FILTERS["spatiotemporal"],
    "spatiotemporal-normalized": DEFAULT_FILTERS["spatiotemporal-normalized"],
    "demographic": [name for name, _ in DEMOGRAPHIC_COLUMNS],
    "demographic+deaths": [name for name, _ in DEMOGRAPHIC_COLUMNS],
    "demographic+normalized-deaths": [name for name, _ in DEMOGRAPHIC_COLUMNS],
}


@dataclass(frozen=True)
class DatasetConfig:
    kind: str
    deaths: str
    centroids: Optional[str] = None
    population: Optional[str] = None
    demographics: Optional[str] = None
    years: tuple[int, int] = (2009, 2023)


@dataclass(frozen=True)
class CalibrateConfig:
    n_candidates: tuple[int, ...]
    p_step: float


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetConfig
    filter_columns: tuple[str, ...]
    cover: Optional[tuple[int, float]]  # (n, p) when fixed
    calibrate: Optional[CalibrateConfig]
    eps: Optional[float]
    min_samples: int
    colors: tuple[str, ...]
    seed: int
    iterations: int
    output: Optional[str]

    def digest(self) -> str:
        """Stable hash of the resolved configuration."""
        payload = {
            "dataset": {
                "kind": self.dataset.kind,
                "years": list(self.dataset.years),
            },
            "filter": list(self.filter_columns),
            "cover": list(self.cover) if self.cover else None,
            "calibrate": (
                {
                    "n_candidates": list(self.calibrate.n_candidates),
                    "p_step": self.calibrate.p_step,
                }
                if self.calibrate
                else None
            ),
            "cluster": {"eps": self.eps, "min_samples": self.min_samples},
            "colors": list(self.colors),
            "layout": {"seed": self.seed, "iterations": self.iterations},
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _expect(mapping, key, kind, path, required=True, default=None):
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    value = mapping[key]
    if kind is bool and not isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected a boolean, got {value!r}")
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
        value = float(value)
    if kind is str and not isinstance(value, str):
        raise ConfigError(f"{path}.{key}: expected a string, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise ConfigError(f"{path}.{key}: expected a list, got {value!r}")
    if kind is dict and not isinstance(value, dict):
        raise ConfigError(f"{path}.{key}: expected a mapping, got {value!r}")
    return value


def _no_extras(mapping, allowed, path):
    extras = sorted(set(mapping) - set(allowed))
    if extras:
        raise ConfigError(f"{path}: unknown field(s) {extras}; allowed: {sorted(allowed)}")


def validate_config(raw: dict) -> RunConfig:
    """Turn a parsed YAML document into a RunConfig or raise ConfigError."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    _no_extras(raw, {"dataset", "filter", "cover", "calibrate", "cluster", "colors", "layout", "output"}, "config")

    dataset_raw = _expect(raw, "dataset", dict, "config")
    _no_extras(dataset_raw, {"kind", "deaths", "centroids", "population", "demographics", "years"}, "dataset")
    kind = _expect(dataset_raw, "kind", str, "dataset")
    if kind not in DATASET_KINDS:
        raise ConfigError(f"dataset.kind: {kind!r} is not one of {list(DATASET_KINDS)}")
    deaths = _expect(dataset_raw, "deaths", str, "dataset")
    centroids = _expect(dataset_raw, "centroids", str, "dataset", required=kind in SPATIOTEMPORAL_KINDS)
    needs_population = kind != "spatiotemporal"
    population = _expect(dataset_raw, "population", str, "dataset", required=needs_population)
    demographics = _expect(dataset_raw, "demographics", str, "dataset", required=kind in DEMOGRAPHIC_KINDS)
    years_raw = _expect(dataset_raw, "years", list, "dataset", required=False, default=[2009, 2023])
    if len(years_raw) != 2 or not all(isinstance(y, int) and not isinstance(y, bool) for y in years_raw):
        raise ConfigError(f"dataset.years: expected [first, last] integers, got {years_raw!r}")
    dataset = DatasetConfig(
        kind=kind,
        deaths=deaths,
        centroids=centroids,
        population=population,
        demographics=demographics,
        years=(years_raw[0], years_raw[1]),
    )

    known_columns = COLUMNS_BY_KIND[kind]
    filter_columns = _expect(raw, "filter", list, "config", required=False, default=DEFAULT_FILTERS[kind])
    for i, name in enumerate(filter_columns):
        if name not in known_columns:
            raise ConfigError(
                f"filter[{i}]: column {name!r} does not exist in dataset kind {kind!r}; "
                f"available: {known_columns}"
            )
    if len(set(filter_columns)) != len(filter_columns):
        raise ConfigError(f"filter: columns must be distinct, got {filter_columns}")

    cover_raw = raw.get("cover")
    calibrate_raw = raw.get("calibrate")
    if (cover_raw is None) == (calibrate_raw is None):
        raise ConfigError("config: exactly one of 'cover' or 'calibrate' must be present")
    cover = None
    calibrate = None
    if cover_raw is not None:
        _expect(raw, "cover", dict, "config")
        _no_extras(cover_raw, {"n", "p"}, "cover")
        n = _expect(cover_raw, "n", int, "cover")
        p = _expect(cover_raw, "p", float, "cover")
        if n < 1:
            raise ConfigError(f"cover.n: must be >= 1, got {n}")
        if not 0.0 <= p < 1.0:
            raise ConfigError(f"cover.p: must lie in [0, 1), got {p}")
        cover = (n, p)
    else:
        _expect(raw, "calibrate", dict, "config")
        _no_extras(calibrate_raw, {"n_candidates", "p_step"}, "calibrate")
        candidates = _expect(calibrate_raw, "n_candidates", list, "calibrate")
        if not candidates or not all(
            isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in candidates
        ):
            raise ConfigError(
                f"calibrate.n_candidates: expected a non-empty list of integers >= 1, got {candidates!r}"
            )
        p_step = _expect(calibrate_raw, "p_step", float, "calibrate")
        if not 0.0 < p_step <= 0.5:
            raise ConfigError(f"calibrate.p_step: must lie in (0, 0.5], got {p_step}")
        outcome = {"cumulative_deaths", "normalized_cumulative_deaths"} & set(filter_columns)
        if outcome:
            raise ConfigError(
                f"filter: calibration scans must exclude outcome columns, found {sorted(outcome)}"
            )
        calibrate = CalibrateConfig(tuple(candidates), p_step)

    cluster_raw = _expect(raw, "cluster", dict, "config", required=False, default={})
    _no_extras(cluster_raw, {"eps", "min_samples"}, "cluster")
    eps = _expect(cluster_raw, "eps", float, "cluster", required=False)
    if eps is not None and eps <= 0:
        raise ConfigError(f"cluster.eps: must be positive, got {eps}")
    min_samples = _expect(cluster_raw, "min_samples", int, "cluster", required=False, default=1)
    if min_samples < 1:
        raise ConfigError(f"cluster.min_samples: must be >= 1, got {min_samples}")

    colors = _expect(raw, "colors", list, "config", required=False, default=list(filter_columns))
    for i, name in enumerate(colors):
        if name not in known_columns:
            raise ConfigError(
                f"colors[{i}]: column {name!r} does not exist in dataset kind {kind!r}"
            )

    layout_raw = _expect(raw, "layout", dict, "config", required=False, default={})
    _no_extras(layout_raw, {"seed", "iterations"}, "layout")
    seed = _expect(layout_raw, "seed", int, "layout", required=False, default=42)
    iterations = _expect(layout_raw, "iterations", int, "layout", required=False, default=500)
    if iterations < 1:
        raise ConfigError(f"layout.iterations: must be >= 1, got {iterations}")

    output = _expect(raw, "output", str, "config", required=False)

    return RunConfig(
        dataset=dataset,
        filter_columns=tuple(filter_columns),
        cover=cover,
        calibrate=calibrate,
        eps=eps,
        min_samples=min_samples,
        colors=tuple(colors),
        seed=seed,
        iterations=iterations,
        output=output,
    )


def load_config(path) -> RunConfig:
    """Read and validate a YAML run configuration."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if raw is None:
        raise ConfigError(f"{path}: empty config")
    return validate_config(raw)
