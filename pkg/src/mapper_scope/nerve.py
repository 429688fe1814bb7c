"""Mapper graph assembly: nodes from preimage clusters, edges from shared rows.

Node ids are assigned in lexicographic (element id, cluster id) order so two
builds from identical inputs produce identical graphs. Edges carry the shared
row count as a weight; exports may drop it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .cluster import ClusterParams, cluster_preimages, default_eps
from .cover import CoverParams, CubicalCover, FilterSpec, fit_cover
from .errors import GraphError
from .ingest import PointTable


@dataclass(frozen=True)
class MapperNode:
    id: int
    element: tuple[int, ...]
    cluster: int
    members: frozenset[int]

    def __post_init__(self):
        if not self.members:
            raise GraphError(f"node {self.id} has no members")


@dataclass(frozen=True)
class MapperEdge:
    a: int
    b: int
    shared: int

    def __post_init__(self):
        if not self.a < self.b:
            raise GraphError(f"edge endpoints must satisfy a < b, got ({self.a}, {self.b})")
        if self.shared < 1:
            raise GraphError("edges require at least one shared row")


@dataclass(frozen=True)
class Provenance:
    filter_dims: tuple[int, ...]
    cover: CoverParams
    cluster: ClusterParams
    table_fingerprint: str


@dataclass(frozen=True)
class ColorMap:
    column: str
    values: dict[int, float]

    def __getitem__(self, node_id: int) -> float:
        return self.values[node_id]


class MapperGraph:
    def __init__(self, nodes, edges, provenance, cover=None):
        self.nodes: tuple[MapperNode, ...] = tuple(nodes)
        self.edges: tuple[MapperEdge, ...] = tuple(edges)
        self.provenance: Provenance = provenance
        self.cover: Optional[CubicalCover] = cover
        ids = [n.id for n in self.nodes]
        if ids != list(range(len(ids))):
            raise GraphError("node ids must be 0..V-1 in order")
        keys = {(n.element, n.cluster) for n in self.nodes}
        if len(keys) != len(self.nodes):
            raise GraphError("duplicate (element, cluster) node keys")
        seen = set()
        for e in self.edges:
            if e.a >= len(ids) or e.b >= len(ids):
                raise GraphError(f"edge ({e.a}, {e.b}) references a missing node")
            if (e.a, e.b) in seen:
                raise GraphError(f"duplicate edge ({e.a}, {e.b})")
            seen.add((e.a, e.b))

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> MapperNode:
        if not 0 <= node_id < len(self.nodes):
            raise GraphError(f"unknown node {node_id}")
        return self.nodes[node_id]

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for e in self.edges:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
        return adj

    def degree(self, node_id: int) -> int:
        return sum(1 for e in self.edges if node_id in (e.a, e.b))


def build_mapper(
    table: PointTable,
    filt: FilterSpec,
    cover_params: CoverParams,
    cluster_params: Optional[ClusterParams] = None,
) -> MapperGraph:
    """Run cover -> cluster -> nerve over a table.

    When no cluster parameters are given, eps defaults to half the mean
    nearest-neighbor distance over the whole table with min_samples 1, so
    every row lands in at least one node.
    """
    if cluster_params is None:
        cluster_params = ClusterParams(eps=default_eps(table.rows), min_samples=1)
    cover = fit_cover(table, filt, cover_params)
    clustered = cluster_preimages(table, cover, filt, cluster_params)

    nodes = []
    rows_to_nodes: dict[int, list[int]] = {}
    for element, rows, labeling in clustered:
        for cluster_id in range(labeling.cluster_count):
            members = frozenset(
                rows[i] for i in range(len(rows)) if labeling.labels[i] == cluster_id
            )
            node = MapperNode(len(nodes), element.id, cluster_id, members)
            nodes.append(node)
            for row in members:
                rows_to_nodes.setdefault(row, []).append(node.id)

    shared: dict[tuple[int, int], int] = {}
    for node_ids in rows_to_nodes.values():
        for a, b in combinations(node_ids, 2):
            shared[(a, b)] = shared.get((a, b), 0) + 1
    edges = [MapperEdge(a, b, count) for (a, b), count in sorted(shared.items())]

    provenance = Provenance(
        filter_dims=filt.dims,
        cover=cover_params,
        cluster=cluster_params,
        table_fingerprint=table.fingerprint(),
    )
    return MapperGraph(nodes, edges, provenance, cover=cover)


def color_by(graph: MapperGraph, table: PointTable, column: str) -> ColorMap:
    """Per-node arithmetic mean of one table column over node members."""
    col = table.column(column)
    values = {
        node.id: float(col[sorted(node.members)].mean()) for node in graph.nodes
    }
    return ColorMap(column, values)


@dataclass(frozen=True)
class CompositionReport:
    node_id: int
    region_counts: dict[str, int]  # fips -> member rows
    region_names: dict[str, str]
    dominant_region: str
    purity: float
    time_range: tuple[int, int]


def node_composition(graph: MapperGraph, table: PointTable, node_id: int) -> CompositionReport:
    """Which regions a node draws from, its dominant region, and its time span."""
    node = graph.node(node_id)
    counts: dict[str, int] = {}
    names: dict[str, str] = {}
    times = []
    for row in sorted(node.members):
        meta = table.row_meta[row]
        counts[meta.region.fips] = counts.get(meta.region.fips, 0) + 1
        names.setdefault(meta.region.fips, meta.region.name)
        times.append(meta.time)
    # Ties resolve to the smallest fips so reports are deterministic.
    dominant = min(counts, key=lambda f: (-counts[f], f))
    return CompositionReport(
        node_id=node_id,
        region_counts=dict(sorted(counts.items())),
        region_names={f: names[f] for f in sorted(counts)},
        dominant_region=dominant,
        purity=counts[dominant] / len(node.members),
        time_range=(min(times), max(times)),
    )
