"""Density-based clustering of cover-element preimages.

DBSCAN is implemented directly so the tie-break rule is pinned down: a border
point joins the cluster of the lowest-index core point within eps. Cluster ids
are contiguous from 0 in order of each cluster's lowest-index core point, and
noise rows carry the label -1. Distances are plain euclidean on the raw
ambient columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .cover import CoverElement, CubicalCover, FilterSpec
from .errors import DataError
from .ingest import PointTable

NOISE = -1

# Above this size, low-dimensional inputs go through a uniform grid instead of
# the blocked all-pairs scan.
_GRID_MIN_POINTS = 4096
_GRID_MAX_DIM = 4
_BLOCK = 256


@dataclass(frozen=True)
class ClusterParams:
    eps: float
    min_samples: int = 1
    metric: str = "euclidean"

    def __post_init__(self):
        if self.eps <= 0:
            raise DataError(f"eps must be positive, got {self.eps}")
        if self.min_samples < 1:
            raise DataError(f"min_samples must be >= 1, got {self.min_samples}")
        if self.metric != "euclidean":
            raise DataError(f"unsupported metric {self.metric!r}")


@dataclass(frozen=True)
class ClusterLabeling:
    labels: tuple[int, ...]
    cluster_count: int

    def members(self, cluster_id: int) -> tuple[int, ...]:
        return tuple(i for i, l in enumerate(self.labels) if l == cluster_id)


def default_eps(points: np.ndarray, scale: float = 0.5) -> float:
    """`scale` times the mean nearest-neighbor distance; 1.0 for degenerate inputs."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return 1.0
    if points.ndim == 1:
        points = points[:, None]
    distances, _ = cKDTree(points).query(points, k=2)
    mean_nn = float(distances[:, 1].mean())
    if mean_nn <= 0.0:
        return 1.0
    return scale * mean_nn


def _neighbors_blocked(points: np.ndarray, eps: float) -> list[np.ndarray]:
    out = []
    eps2 = eps * eps
    for start in range(0, len(points), _BLOCK):
        block = points[start:start + _BLOCK]
        d2 = ((block[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        for row in d2:
            out.append(np.nonzero(row <= eps2)[0])
    return out


def _neighbors_grid(points: np.ndarray, eps: float) -> list[np.ndarray]:
    # Uniform grid with eps-sized cells: all neighbors of a point lie in the
    # 3^D block of cells around its own.
    cells: dict[tuple[int, ...], list[int]] = {}
    keys = np.floor(points / eps).astype(int)
    for i, key in enumerate(map(tuple, keys)):
        cells.setdefault(key, []).append(i)
    offsets = list(product((-1, 0, 1), repeat=points.shape[1]))
    eps2 = eps * eps
    out = []
    for i, key in enumerate(map(tuple, keys)):
        candidates = []
        for off in offsets:
            bucket = cells.get(tuple(k + o for k, o in zip(key, off)))
            if bucket:
                candidates.extend(bucket)
        candidates = np.array(sorted(candidates), dtype=int)
        d2 = ((points[candidates] - points[i]) ** 2).sum(axis=1)
        out.append(candidates[d2 <= eps2])
    return out


def _neighbor_lists(points: np.ndarray, eps: float) -> list[np.ndarray]:
    """Per point, the ascending indices within eps (inclusive, self included)."""
    if len(points) > _GRID_MIN_POINTS and points.shape[1] <= _GRID_MAX_DIM:
        return _neighbors_grid(points, eps)
    return _neighbors_blocked(points, eps)


def dbscan(points: Sequence[Sequence[float]], params: ClusterParams) -> ClusterLabeling:
    """Label points with DBSCAN semantics; empty input yields zero clusters."""
    X = np.asarray(points, dtype=float)
    if X.size == 0:
        return ClusterLabeling((), 0)
    if X.ndim == 1:
        X = X[:, None]
    if not np.all(np.isfinite(X)):
        raise DataError("dbscan input contains NaN or infinite values")

    neighbors = _neighbor_lists(X, params.eps)
    core = np.array([len(nb) >= params.min_samples for nb in neighbors])
    labels = np.full(len(X), NOISE, dtype=int)

    cluster_id = 0
    for seed in range(len(X)):
        if not core[seed] or labels[seed] != NOISE:
            continue
        labels[seed] = cluster_id
        stack = [seed]
        while stack:
            u = stack.pop()
            for v in neighbors[u]:
                if core[v] and labels[v] == NOISE:
                    labels[v] = cluster_id
                    stack.append(v)
        cluster_id += 1

    # Border points: lowest-index core point within eps decides the cluster.
    for i in range(len(X)):
        if labels[i] == NOISE:
            for j in neighbors[i]:
                if core[j]:
                    labels[i] = labels[j]
                    break

    return ClusterLabeling(tuple(int(l) for l in labels), cluster_id)


def cluster_preimages(
    table: PointTable,
    cover: CubicalCover,
    filt: FilterSpec,
    params: ClusterParams,
) -> list[tuple[CoverElement, tuple[int, ...], ClusterLabeling]]:
    """Cluster every non-empty cover element's preimage in the full ambient space.

    Returns (element, row indices, labeling) triples in lexicographic element
    order; labeling indices are positions within the row-index tuple.
    """
    memberships = cover.row_memberships(table, filt)
    rows_by_element: dict[tuple[int, ...], list[int]] = {}
    for row, element_ids in enumerate(memberships):
        for element_id in element_ids:
            rows_by_element.setdefault(element_id, []).append(row)
    out = []
    for element_id in sorted(rows_by_element):
        rows = tuple(rows_by_element[element_id])
        labeling = dbscan(table.rows[list(rows)], params)
        out.append((cover.element(element_id), rows, labeling))
    return out
