"""Config-driven pipeline runner.

    mapper-scope run --config run.yaml [--out DIR] [--seed N] [--verbose]
    mapper-scope calibrate --config run.yaml [--out DIR] [--verbose]
    mapper-scope diff DIR_A DIR_B

Exit codes: 0 success, 2 configuration error, 3 input file error, 4 data or
graph validation error, 5 calibration found no admissible pair, 6 incompatible
diff, 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional

from . import __version__
from .analyze import calibrate, connected_components, cycle_basis, detect_flares
from .cluster import ClusterParams, default_eps
from .config import DEMOGRAPHIC_KINDS, RunConfig, load_config
from .cover import CoverParams, FilterSpec
from .errors import (
    CalibrationError,
    ConfigError,
    CoverError,
    DataError,
    DiffError,
    GraphError,
    InputError,
    MapperScopeError,
)
from .export import (
    RunArtifacts,
    analysis_payload,
    calibration_payload,
    dump_json,
    graph_payload,
    structural_diff,
    write_artifacts,
    write_text_atomic,
)
from .ingest import (
    PointTable,
    build_demographic_table,
    build_spatiotemporal_table,
    load_centroids,
    load_deaths,
    load_demographics,
    load_population,
)
from .layout import LayoutConfig, component_spread, embed_3d
from .nerve import build_mapper, color_by

log = logging.getLogger("mapper_scope")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CODES = {
    ConfigError: 2,
    InputError: 3,
    DataError: 4,
    CoverError: 4,
    GraphError: 4,
    CalibrationError: 5,
    DiffError: 6,
}


def build_table(config: RunConfig) -> tuple[PointTable, dict[str, str]]:
    """Load the CSVs named by the config and assemble the point table."""
    kind = config.dataset.kind
    inputs = {"deaths": config.dataset.deaths}
    deaths = load_deaths(config.dataset.deaths)
    if kind in DEMOGRAPHIC_KINDS:
        inputs["demographics"] = config.dataset.demographics
        inputs["population"] = config.dataset.population
        demographics = load_demographics(config.dataset.demographics)
        population = load_population(config.dataset.population)
        table = build_demographic_table(
            demographics, deaths, population, years=config.dataset.years
        )
    else:
        inputs["centroids"] = config.dataset.centroids
        centroids = load_centroids(config.dataset.centroids)
        population = None
        if config.dataset.population:
            inputs["population"] = config.dataset.population
            population = load_population(config.dataset.population)
        table = build_spatiotemporal_table(
            deaths,
            centroids,
            population=population,
            normalize=kind == "spatiotemporal-normalized",
        )
    log.info("built %s table: %d rows x %d columns", kind, len(table), len(table.columns))
    return table, inputs


def _resolve_cluster_params(config: RunConfig, table: PointTable) -> ClusterParams:
    eps = config.eps if config.eps is not None else default_eps(table.rows)
    return ClusterParams(eps=eps, min_samples=config.min_samples)


def _resolve_out_dir(config: RunConfig, out_flag: Optional[str]) -> str:
    out = out_flag or config.output
    if not out:
        raise ConfigError("output: no output directory (set 'output' in the config or pass --out)")
    return out


def run_pipeline(
    config: RunConfig,
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
) -> RunArtifacts:
    """ingest -> (calibrate) -> build -> analyze -> layout -> export."""
    out = _resolve_out_dir(config, out_dir)
    table, inputs = build_table(config)
    filt = FilterSpec.from_columns(table, config.filter_columns)
    cluster_params = _resolve_cluster_params(config, table)

    calibration = None
    if config.cover is not None:
        cover_params = CoverParams(*config.cover)
    else:
        calibration = calibrate(
            table,
            filt,
            config.calibrate.n_candidates,
            config.calibrate.p_step,
            cluster_params,
        )
        cover_params = CoverParams(calibration.n, calibration.p)
        log.info("calibration chose n=%d p=%.4g", calibration.n, calibration.p)

    graph = build_mapper(table, filt, cover_params, cluster_params)
    log.info("mapper graph: %d nodes, %d edges", len(graph.nodes), len(graph.edges))

    partition = connected_components(graph)
    cycles = cycle_basis(graph)
    colors = {name: color_by(graph, table, name) for name in config.colors}
    flare_reports = [detect_flares(graph, colors[name], table) for name in config.colors]

    layout_seed = seed if seed is not None else config.seed
    embedding = embed_3d(graph, LayoutConfig(seed=layout_seed, iterations=config.iterations))
    embedding = component_spread(embedding, partition)

    analysis = analysis_payload(partition, cycles, flare_reports, calibration)
    meta = {
        "schema_version": 1,
        "generator": f"mapper-scope {__version__}",
        "dataset_kind": config.dataset.kind,
        "columns": [list(c) for c in table.columns],
        "rows": len(table),
        "filter": list(config.filter_columns),
        "cover": {"n": cover_params.n, "p": cover_params.p},
        "cluster": {"eps": cluster_params.eps, "min_samples": cluster_params.min_samples},
        "layout": {"seed": layout_seed, "iterations": config.iterations},
        "colors": list(config.colors),
        "table_fingerprint": table.fingerprint(),
    }
    payload = graph_payload(graph, table, colors, embedding, analysis, meta)
    artifacts = write_artifacts(
        out_dir=out,
        graph=payload,
        analysis=analysis,
        config_digest=config.digest(),
        inputs=inputs,
        html_title=f"Mapper graph ({config.dataset.kind})",
    )
    log.info("artifacts written to %s", out)
    return artifacts


def run_calibration(config: RunConfig, out_dir: Optional[str] = None) -> dict:
    """Run the connectivity scan alone and write calibration.json."""
    if config.calibrate is None:
        raise ConfigError("calibrate: config has a fixed cover; add a 'calibrate' block")
    out = _resolve_out_dir(config, out_dir)
    table, _ = build_table(config)
    filt = FilterSpec.from_columns(table, config.filter_columns)
    cluster_params = _resolve_cluster_params(config, table)
    result = calibrate(
        table, filt, config.calibrate.n_candidates, config.calibrate.p_step, cluster_params
    )
    payload = calibration_payload(result)
    os.makedirs(out, exist_ok=True)
    write_text_atomic(os.path.join(out, "calibration.json"), dump_json(payload))
    return payload


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapper-scope",
        description="Build, calibrate, analyze, and export Mapper graphs from county tables.",
    )
    parser.add_argument("--version", action="version", version=f"mapper-scope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the full pipeline and write artifacts")
    run_p.add_argument("--config", required=True, help="YAML run configuration")
    run_p.add_argument("--out", help="output directory (overrides config)")
    run_p.add_argument("--seed", type=int, help="layout seed (overrides config)")
    run_p.add_argument("--verbose", action="store_true")

    cal_p = sub.add_parser("calibrate", help="run the connectivity scan only")
    cal_p.add_argument("--config", required=True, help="YAML run configuration")
    cal_p.add_argument("--out", help="output directory (overrides config)")
    cal_p.add_argument("--verbose", action="store_true")

    diff_p = sub.add_parser("diff", help="structurally compare two run directories")
    diff_p.add_argument("dir_a")
    diff_p.add_argument("dir_b")
    diff_p.add_argument("--verbose", action="store_true")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        if args.command == "run":
            artifacts = run_pipeline(load_config(args.config), args.out, args.seed)
            print(artifacts.out_dir)
        elif args.command == "calibrate":
            payload = run_calibration(load_config(args.config), args.out)
            print(f"n={payload['n']} p={payload['p']}")
        elif args.command == "diff":
            print(structural_diff(args.dir_a, args.dir_b))
        return EXIT_OK
    except MapperScopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, CalibrationError) and exc.scan:
            for n, p, c in exc.scan:
                log.info("scanned n=%d p=%.4g -> %d component(s)", n, p, c)
        return EXIT_CODES.get(type(exc), EXIT_UNEXPECTED)
    except Exception as exc:  # pragma: no cover - last-resort diagnostics
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
