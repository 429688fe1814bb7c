"""Artifact serialization: graph.json, analysis.json, HTML, run manifest, diffs.

graph.json is the canonical wire format: {meta, nodes, edges, analysis} with
stable key order so identical runs are byte-identical. The HTML export inlines
the graph payload and the viewer bundle; it makes no network requests.
"""

from __future__ import annotations

import hashlib
import html as html_escape
import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

from .analyze import ComponentPartition, CycleReport, FlareReport
from .errors import DiffError, InputError
from .ingest import PointTable
from .layout import Embedding3D
from .nerve import ColorMap, MapperGraph, node_composition

SCHEMA_VERSION = 1


def write_text_atomic(path: str, data: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(data)
    os.replace(tmp, path)


def dump_json(payload) -> str:
    return json.dumps(payload, indent=1, ensure_ascii=False) + "\n"


def analysis_payload(
    partition: ComponentPartition,
    cycles: CycleReport,
    flare_reports: Sequence[FlareReport],
    calibration=None,
) -> dict:
    """JSON-ready analysis block; flare trends are merged across color columns."""
    flares = []
    if flare_reports:
        base = flare_reports[0]
        for i, flare in enumerate(base.flares):
            trends = {}
            for report in flare_reports:
                other = report.flares[i]
                trends[report.color_column] = {
                    "sign": other.trend,
                    "rho": other.trend_rho,
                }
            flares.append(
                {
                    "component": flare.component,
                    "attachments": list(flare.attachments),
                    "nodes": list(flare.nodes),
                    "dominant_region": flare.dominant_region,
                    "purity": flare.purity,
                    "time_span": list(flare.time_span),
                    "trends": trends,
                }
            )
        trunk = sorted(base.trunk_nodes)
        trunkless = list(base.trunkless_components)
    else:
        trunk = []
        trunkless = []
    payload = {
        "components": {
            "count": partition.count,
            "sizes": list(partition.sizes),
            "largest": partition.largest,
            "of_nodes": list(partition.component_of),
        },
        "cycles": {
            "count": cycles.cycle_count,
            "basis": [list(c) for c in cycles.basis],
        },
        "flares": {
            "items": flares,
            "trunk_nodes": trunk,
            "trunkless_components": trunkless,
        },
    }
    if calibration is not None:
        payload["calibration"] = calibration_payload(calibration)
    return payload


def calibration_payload(result) -> dict:
    return {
        "n": result.n,
        "p": result.p,
        "p_step": result.p_step,
        "n_candidates": list(result.n_candidates),
        "per_n": {str(n): p for n, p in sorted(result.per_n.items())},
        "scan": [{"n": n, "p": p, "components": c} for n, p, c in result.scan],
    }


def graph_payload(
    graph: MapperGraph,
    table: PointTable,
    colors: Mapping[str, ColorMap],
    embedding: Embedding3D,
    analysis: dict,
    meta: dict,
) -> dict:
    nodes = []
    for node in graph.nodes:
        composition = node_composition(graph, table, node.id)
        nodes.append(
            {
                "id": node.id,
                "element": list(node.element),
                "members": sorted(node.members),
                "colors": {name: cmap[node.id] for name, cmap in colors.items()},
                "pos": [float(x) for x in embedding.positions[node.id]],
                "composition": composition.region_counts,
                "dominant_region": composition.dominant_region,
                "purity": composition.purity,
                "time_range": list(composition.time_range),
            }
        )
    return {
        "meta": meta,
        "nodes": nodes,
        "edges": [{"a": e.a, "b": e.b, "shared": e.shared} for e in graph.edges],
        "analysis": analysis,
    }


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 16), b""):
                h.update(chunk)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    return h.hexdigest()


def manifest_payload(config_digest: str, inputs: Mapping[str, str], artifacts: Sequence[str]) -> dict:
    input_hashes = {name: file_sha256(path) for name, path in sorted(inputs.items())}
    combined = hashlib.sha256(
        json.dumps({"config": config_digest, "inputs": input_hashes}, sort_keys=True).encode()
    ).hexdigest()
    return {
        "schema_version": SCHEMA_VERSION,
        "config_digest": config_digest,
        "inputs": input_hashes,
        "artifacts": sorted(artifacts),
        "manifest_hash": combined,
    }


def _viewer_bundle() -> str:
    return resources.files("mapper_scope").joinpath("assets/viewer.js").read_text("utf-8")


_HTML_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>
html, body {{ margin: 0; height: 100%; background: #101014; color: #e8e8ee;
  font: 13px/1.4 system-ui, sans-serif; }}
#app {{ position: relative; width: 100%; height: 100%; }}
#app canvas {{ display: block; width: 100%; height: 100%; cursor: grab; }}
#hud {{ position: absolute; top: 10px; left: 10px; background: rgba(16,16,20,.85);
  border: 1px solid #333; border-radius: 6px; padding: 8px 10px; max-width: 320px; }}
#hud select {{ margin-left: 6px; }}
#tooltip {{ position: absolute; pointer-events: none; background: rgba(0,0,0,.85);
  border: 1px solid #555; border-radius: 4px; padding: 6px 8px; display: none; }}
#error {{ color: #ff7070; white-space: pre-wrap; padding: 12px; }}
.legend {{ margin-top: 6px; height: 10px; border-radius: 3px; }}
.legend-labels {{ display: flex; justify-content: space-between; }}
</style>
</head>
<body>
<div id="app"></div>
<script id="graph-data" type="application/json">{payload}</script>
<script type="module">
{bundle}
</script>
</body>
</html>
"""


def render_html(payload: dict, initial_color: str, title: str) -> str:
    """A single self-contained HTML page: inline payload plus inline viewer."""
    document = dict(payload)
    document["viewer"] = {"initial_color": initial_color}
    blob = dump_json(document).replace("</", "<\\/")  # keep the inline script intact
    return _HTML_TEMPLATE.format(
        title=html_escape.escape(title),
        payload=blob,
        bundle=_viewer_bundle(),
    )


@dataclass(frozen=True)
class RunArtifacts:
    out_dir: str
    graph_json: str
    analysis_json: str
    html_files: tuple[str, ...]
    manifest: str


def write_artifacts(
    out_dir: str,
    graph: dict,
    analysis: dict,
    config_digest: str,
    inputs: Mapping[str, str],
    html_title: str,
) -> RunArtifacts:
    os.makedirs(out_dir, exist_ok=True)
    graph_path = os.path.join(out_dir, "graph.json")
    analysis_path = os.path.join(out_dir, "analysis.json")
    write_text_atomic(graph_path, dump_json(graph))
    write_text_atomic(analysis_path, dump_json(analysis))
    html_files = []
    for column in graph["meta"]["colors"]:
        name = f"graph_{column}.html"
        write_text_atomic(
            os.path.join(out_dir, name),
            render_html(graph, column, f"{html_title} - {column}"),
        )
        html_files.append(name)
    artifact_names = ["graph.json", "analysis.json", *html_files, "run-manifest.json"]
    manifest = manifest_payload(config_digest, inputs, artifact_names)
    manifest_path = os.path.join(out_dir, "run-manifest.json")
    write_text_atomic(manifest_path, dump_json(manifest))
    return RunArtifacts(
        out_dir=out_dir,
        graph_json=graph_path,
        analysis_json=analysis_path,
        html_files=tuple(os.path.join(out_dir, n) for n in html_files),
        manifest=manifest_path,
    )


# ---------------------------------------------------------------------------
# Structural diff between two run directories.
# ---------------------------------------------------------------------------

def _load_run(run_dir: str) -> tuple[dict, dict]:
    try:
        with open(os.path.join(run_dir, "graph.json"), encoding="utf-8") as fh:
            graph = json.load(fh)
        with open(os.path.join(run_dir, "analysis.json"), encoding="utf-8") as fh:
            analysis = json.load(fh)
    except OSError as exc:
        raise InputError(f"{run_dir}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{run_dir}: invalid JSON: {exc}") from None
    return graph, analysis


def _dominant_of_cycle(graph: dict, cycle: Sequence[int]) -> str:
    counts: dict[str, int] = {}
    for node_id in cycle:
        for fips, count in graph["nodes"][node_id]["composition"].items():
            counts[fips] = counts.get(fips, 0) + count
    return min(counts, key=lambda f: (-counts[f], f))


def _keyed_multiset(keys: Sequence[str]) -> dict[str, int]:
    out: dict[str, int] = {}
    for key in keys:
        out[key] = out.get(key, 0) + 1
    return out


def _multiset_delta(before: dict, after: dict, label: str) -> list[str]:
    lines = []
    for key in sorted(set(before) | set(after)):
        delta = after.get(key, 0) - before.get(key, 0)
        if delta > 0:
            lines.append(f"+ {delta} new {label}(s) dominated by region {key}")
        elif delta < 0:
            lines.append(f"- {-delta} vanished {label}(s) dominated by region {key}")
    return lines


def structural_diff(dir_a: str, dir_b: str) -> str:
    """Human-readable structural differences between two run directories."""
    graph_a, analysis_a = _load_run(dir_a)
    graph_b, analysis_b = _load_run(dir_b)
    kind_a = graph_a["meta"].get("dataset_kind")
    kind_b = graph_b["meta"].get("dataset_kind")
    if kind_a != kind_b:
        raise DiffError(f"incompatible dataset kinds: {kind_a!r} vs {kind_b!r}")

    lines = []
    for label, a, b in (
        ("nodes", len(graph_a["nodes"]), len(graph_b["nodes"])),
        ("edges", len(graph_a["edges"]), len(graph_b["edges"])),
        ("components", analysis_a["components"]["count"], analysis_b["components"]["count"]),
        ("cycles", analysis_a["cycles"]["count"], analysis_b["cycles"]["count"]),
    ):
        if a != b:
            lines.append(f"{label}: {a} -> {b} ({b - a:+d})")

    flares_a = _keyed_multiset([f["dominant_region"] for f in analysis_a["flares"]["items"]])
    flares_b = _keyed_multiset([f["dominant_region"] for f in analysis_b["flares"]["items"]])
    lines.extend(_multiset_delta(flares_a, flares_b, "flare"))

    cycles_a = _keyed_multiset(
        [_dominant_of_cycle(graph_a, c) for c in analysis_a["cycles"]["basis"]]
    )
    cycles_b = _keyed_multiset(
        [_dominant_of_cycle(graph_b, c) for c in analysis_b["cycles"]["basis"]]
    )
    lines.extend(_multiset_delta(cycles_a, cycles_b, "cycle"))
    return "\n".join(lines)
