"""Interpretive features of Mapper graphs.

Connected components, independent cycles (E - V + C of them, with a
fundamental basis from a spanning forest), and flares. A flare is a connected
appendage outside the 2-core of its component: peel degree <= 1 nodes until
none remain, call the survivors of each component its trunk, and report each
connected piece of the peeled remainder together with its attachment node.
Components whose 2-core is empty (trees) are flagged trunkless instead.

Calibration scans overlap fractions upward at each candidate interval count
until the Mapper graph of the projected columns alone becomes a single
component, and recommends the smallest such overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cluster import ClusterParams, default_eps
from .cover import CoverParams, FilterSpec
from .errors import CalibrationError, GraphError
from .ingest import PointTable
from .nerve import ColorMap, MapperGraph, build_mapper


@dataclass(frozen=True)
class ComponentPartition:
    component_of: tuple[int, ...]  # node id -> component id
    sizes: tuple[int, ...]
    largest: int

    @property
    def count(self) -> int:
        return len(self.sizes)

    def nodes_in(self, component_id: int) -> list[int]:
        return [i for i, c in enumerate(self.component_of) if c == component_id]


def connected_components(graph: MapperGraph) -> ComponentPartition:
    """Undirected components; ids ordered by each component's smallest node id."""
    adj = graph.adjacency()
    component_of = [-1] * len(graph)
    sizes = []
    for start in range(len(graph)):
        if component_of[start] != -1:
            continue
        cid = len(sizes)
        stack = [start]
        component_of[start] = cid
        size = 0
        while stack:
            u = stack.pop()
            size += 1
            for v in adj[u]:
                if component_of[v] == -1:
                    component_of[v] = cid
                    stack.append(v)
        sizes.append(size)
    largest = max(range(len(sizes)), key=lambda c: (sizes[c], -c)) if sizes else -1
    return ComponentPartition(tuple(component_of), tuple(sizes), largest)


@dataclass(frozen=True)
class CycleReport:
    cycle_count: int
    basis: tuple[tuple[int, ...], ...]


def cycle_basis(graph: MapperGraph) -> CycleReport:
    """Fundamental cycles from a BFS spanning forest, one per non-tree edge."""
    adj = graph.adjacency()
    parent = [-1] * len(graph)
    depth = [-1] * len(graph)
    for root in range(len(graph)):
        if depth[root] != -1:
            continue
        depth[root] = 0
        queue = [root]
        while queue:
            next_queue = []
            for u in queue:
                for v in sorted(adj[u]):
                    if depth[v] == -1:
                        depth[v] = depth[u] + 1
                        parent[v] = u
                        next_queue.append(v)
            queue = next_queue

    tree_edges = {(min(u, parent[u]), max(u, parent[u])) for u in range(len(graph)) if parent[u] != -1}
    basis = []
    for edge in graph.edges:
        if (edge.a, edge.b) in tree_edges:
            continue
        # Walk both endpoints up to their lowest common ancestor.
        left, right = [edge.a], [edge.b]
        a, b = edge.a, edge.b
        while a != b:
            if depth[a] >= depth[b]:
                a = parent[a]
                left.append(a)
            else:
                b = parent[b]
                right.append(b)
        left.pop()  # drop the duplicated meeting node from one side
        basis.append(tuple(left + right[::-1]))
    return CycleReport(len(basis), tuple(basis))


def two_core(graph: MapperGraph) -> set[int]:
    """Node ids surviving iterated removal of degree <= 1 nodes."""
    adj = graph.adjacency()
    degree = [len(a) for a in adj]
    removed = [False] * len(graph)
    stack = [u for u in range(len(graph)) if degree[u] <= 1]
    while stack:
        u = stack.pop()
        if removed[u]:
            continue
        removed[u] = True
        for v in adj[u]:
            if not removed[v]:
                degree[v] -= 1
                if degree[v] <= 1:
                    stack.append(v)
    return {u for u in range(len(graph)) if not removed[u]}


@dataclass(frozen=True)
class Flare:
    component: int
    attachments: tuple[int, ...]
    nodes: tuple[int, ...]
    dominant_region: str
    purity: float
    time_span: tuple[int, int]
    trend: int  # sign of Spearman rank correlation of color vs. distance
    trend_rho: float


@dataclass(frozen=True)
class FlareReport:
    color_column: str
    flares: tuple[Flare, ...]
    trunk_nodes: frozenset[int]
    trunkless_components: tuple[int, ...]


def _spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks for ties; 0 when degenerate."""
    def ranks(values):
        values = np.asarray(values, dtype=float)
        order = np.argsort(values, kind="stable")
        r = np.empty(len(values))
        i = 0
        while i < len(values):
            j = i
            while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
                j += 1
            r[order[i:j + 1]] = (i + j) / 2.0
            i = j + 1
        return r

    if len(x) < 2:
        return 0.0
    rx, ry = ranks(x), ranks(y)
    sx, sy = rx.std(), ry.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(((rx - rx.mean()) * (ry - ry.mean())).mean() / (sx * sy))


def detect_flares(graph: MapperGraph, color: ColorMap, table: PointTable) -> FlareReport:
    """Appendages outside each component's 2-core with purity and color trend."""
    missing = [n.id for n in graph.nodes if n.id not in color.values]
    if missing:
        raise GraphError(f"color map lacks values for nodes {missing[:5]}")
    partition = connected_components(graph)
    core = two_core(graph)
    adj = graph.adjacency()

    trunkless = tuple(
        c for c in range(partition.count)
        if not any(u in core for u in partition.nodes_in(c))
    )

    # Connected pieces of the peeled remainder, discovered in node-id order.
    visited = set()
    flares = []
    for start in range(len(graph)):
        if start in core or start in visited or partition.component_of[start] in trunkless:
            continue
        piece = []
        stack = [start]
        visited.add(start)
        while stack:
            u = stack.pop()
            piece.append(u)
            for v in adj[u]:
                if v not in core and v not in visited:
                    visited.add(v)
                    stack.append(v)
        piece_set = set(piece)
        attachments = sorted(
            {v for u in piece for v in adj[u] if v in core}
        )

        member_rows = sorted({r for u in piece for r in graph.node(u).members})
        counts: dict[str, int] = {}
        times = []
        for row in member_rows:
            meta = table.row_meta[row]
            counts[meta.region.fips] = counts.get(meta.region.fips, 0) + 1
            times.append(meta.time)
        dominant = min(counts, key=lambda f: (-counts[f], f))

        # Color trend along the flare: rank correlation of color against BFS
        # distance from the attachment(s).
        distance = {u: 0 for u in attachments}
        frontier = list(attachments)
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v in piece_set and v not in distance:
                        distance[v] = distance[u] + 1
                        nxt.append(v)
            frontier = nxt
        ordered = sorted(piece_set)
        rho = _spearman(
            [distance[u] for u in ordered], [color[u] for u in ordered]
        )
        trend = 0 if abs(rho) < 1e-12 else (1 if rho > 0 else -1)

        flares.append(
            Flare(
                component=partition.component_of[start],
                attachments=tuple(attachments),
                nodes=tuple(sorted(piece)),
                dominant_region=dominant,
                purity=counts[dominant] / len(member_rows),
                time_span=(min(times), max(times)),
                trend=trend,
                trend_rho=rho,
            )
        )
    return FlareReport(
        color_column=color.column,
        flares=tuple(flares),
        trunk_nodes=frozenset(core),
        trunkless_components=trunkless,
    )


@dataclass(frozen=True)
class CalibrationResult:
    n: int
    p: float
    scan: tuple[tuple[int, float, int], ...]  # (n, p, component count) per build
    p_step: float
    n_candidates: tuple[int, ...]
    per_n: dict[int, float]  # candidate n -> smallest p reaching one component

    def __post_init__(self):
        reached = {(n, round(p / self.p_step)) for n, p, c in self.scan if c == 1}
        if (self.n, round(self.p / self.p_step)) not in reached:
            raise CalibrationError("chosen pair did not reach a single component")


def calibrate(
    table: PointTable,
    spatial_filter: FilterSpec,
    n_candidates: Sequence[int],
    p_step: float,
    cluster_params: Optional[ClusterParams] = None,
) -> CalibrationResult:
    """Smallest overlap per candidate n that makes the projected graph connected.

    The graph is built on the projected columns only (the projection is both
    the filter and the clustering space), so outcome columns left out of the
    spatial filter cannot influence the scan.
    """
    if not 0.0 < p_step <= 0.5:
        raise CalibrationError(f"p step must lie in (0, 0.5], got {p_step}")
    if not n_candidates:
        raise CalibrationError("no interval-count candidates given")

    projected = table.select(spatial_filter.dims)
    filt = FilterSpec(tuple(range(len(projected.columns))))
    if cluster_params is None:
        cluster_params = ClusterParams(eps=default_eps(projected.rows), min_samples=1)

    p_grid = []
    k = 1
    while k * p_step < 0.95 + 1e-12:
        p_grid.append(round(k * p_step, 12))
        k += 1

    scan = []
    per_n: dict[int, float] = {}
    for n in n_candidates:
        for p in p_grid:
            graph = build_mapper(projected, filt, CoverParams(n, p), cluster_params)
            count = connected_components(graph).count
            scan.append((n, p, count))
            if count == 1:
                per_n[n] = p
                break
    if not per_n:
        raise CalibrationError(
            "no (n, p) pair on the grid produced a single connected component",
            scan=scan,
        )
    best_n = min(per_n, key=lambda n: (per_n[n], n))
    return CalibrationResult(
        n=best_n,
        p=per_n[best_n],
        scan=tuple(scan),
        p_step=p_step,
        n_candidates=tuple(n_candidates),
        per_n=per_n,
    )
