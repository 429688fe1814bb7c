"""Deterministic 3D force-directed embedding.

Spring-electrical model: edges attract in proportion to distance, all pairs
repel in proportion to inverse squared distance, displacement per iteration is
capped by a geometrically cooling temperature. Positions start in a seeded
uniform cube and are centered at the end, so (graph, config) fixes the output
bit for bit. Repulsion is exact all-pairs up to `octree_threshold` nodes and
switches to a Barnes-Hut octree above it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analyze import ComponentPartition
from .errors import GraphError
from .nerve import MapperGraph

_BLOCK = 512
_MIN_D2 = 1e-12


@dataclass(frozen=True)
class LayoutConfig:
    seed: int = 42
    iterations: int = 500
    repulsion: float = 1.0
    spring: float = 0.05
    cooling: float = 0.99
    octree_threshold: int = 5000
    octree_theta: float = 0.7

    def __post_init__(self):
        if self.iterations < 1:
            raise GraphError(f"iterations must be >= 1, got {self.iterations}")
        for name in ("repulsion", "spring", "cooling", "octree_theta"):
            if getattr(self, name) <= 0:
                raise GraphError(f"{name} must be positive")

    @property
    def natural_length(self) -> float:
        """Two-body equilibrium separation of the force law."""
        return (self.repulsion / self.spring) ** (1.0 / 3.0)


@dataclass(frozen=True)
class Embedding3D:
    positions: np.ndarray  # (V, 3)
    seed: int
    iterations: int

    def __post_init__(self):
        self.positions.setflags(write=False)


def _exact_repulsion(positions: np.ndarray, strength: float) -> np.ndarray:
    # F_i = sum_j w_ij (p_i - p_j) with w_ij = strength / d_ij^3, evaluated as
    # p_i * rowsum(w) - w @ P so everything stays in matrix products.
    count = len(positions)
    norms = (positions * positions).sum(axis=1)
    forces = np.zeros_like(positions)
    for start in range(0, count, _BLOCK):
        stop = min(start + _BLOCK, count)
        gram = positions[start:stop] @ positions.T
        d2 = np.maximum(norms[start:stop, None] + norms[None, :] - 2.0 * gram, _MIN_D2)
        w = strength / (d2 * np.sqrt(d2))
        w[np.arange(start, stop) - start, np.arange(start, stop)] = 0.0
        forces[start:stop] = positions[start:stop] * w.sum(axis=1)[:, None] - w @ positions
    return forces


class _OctreeNode:
    __slots__ = ("center", "half", "count", "centroid", "children", "leaf")

    def __init__(self, center, half):
        self.center = center
        self.half = half
        self.count = 0
        self.centroid = np.zeros(3)
        self.children = None
        self.leaf = []  # point indices while undivided


def _octree_build(positions: np.ndarray) -> _OctreeNode:
    lo = positions.min(axis=0)
    hi = positions.max(axis=0)
    half = float(max((hi - lo).max() / 2.0, 1e-9))
    root = _OctreeNode((lo + hi) / 2.0, half)
    for i in range(len(positions)):
        _octree_insert(root, positions, i, depth=0)
    _octree_finalize(root, positions)
    return root


def _octree_insert(node: _OctreeNode, positions, i, depth):
    node.count += 1
    if node.children is None:
        node.leaf.append(i)
        if len(node.leaf) > 1 and depth < 24:
            pending, node.leaf = node.leaf, []
            node.children = {}
            for j in pending:
                _octree_push_child(node, positions, j, depth)
            node.count = len(pending)
        return
    _octree_push_child(node, positions, i, depth)


def _octree_push_child(node: _OctreeNode, positions, i, depth):
    octant = tuple(int(positions[i][k] > node.center[k]) for k in range(3))
    child = node.children.get(octant)
    if child is None:
        offset = (np.array(octant) - 0.5) * node.half
        child = _OctreeNode(node.center + offset, node.half / 2.0)
        node.children[octant] = child
    _octree_insert(child, positions, i, depth + 1)


def _octree_finalize(node: _OctreeNode, positions):
    if node.children is None:
        if node.leaf:
            node.centroid = positions[node.leaf].mean(axis=0)
        return
    total = np.zeros(3)
    for key in sorted(node.children):
        child = node.children[key]
        _octree_finalize(child, positions)
        total += child.centroid * child.count
    node.centroid = total / node.count


def _octree_repulsion(positions: np.ndarray, strength: float, theta: float) -> np.ndarray:
    root = _octree_build(positions)
    forces = np.zeros_like(positions)
    for i in range(len(positions)):
        p = positions[i]
        force = np.zeros(3)
        stack = [root]
        while stack:
            node = stack.pop()
            if node.count == 0:
                continue
            diff = p - node.centroid
            d2 = float(diff @ diff)
            if node.children is None:
                for j in node.leaf:
                    if j == i:
                        continue
                    dj = p - positions[j]
                    dj2 = max(float(dj @ dj), _MIN_D2)
                    force += strength * dj / (dj2 * np.sqrt(dj2))
                continue
            if d2 > _MIN_D2 and (2.0 * node.half) ** 2 < theta * theta * d2:
                force += strength * node.count * diff / (d2 * np.sqrt(d2))
            else:
                for key in sorted(node.children):
                    stack.append(node.children[key])
        forces[i] = force
    return forces


def embed_3d(graph: MapperGraph, config: Optional[LayoutConfig] = None) -> Embedding3D:
    """Embed a Mapper graph in 3-space; identical inputs give identical output."""
    if config is None:
        config = LayoutConfig()
    count = len(graph)
    if count == 0:
        raise GraphError("cannot embed an empty graph")
    if count == 1:
        return Embedding3D(np.zeros((1, 3)), config.seed, config.iterations)

    rng = np.random.default_rng(config.seed)
    scale = config.natural_length * max(1.0, count ** (1.0 / 3.0))
    positions = rng.uniform(-scale, scale, size=(count, 3))

    edge_a = np.array([e.a for e in graph.edges], dtype=int)
    edge_b = np.array([e.b for e in graph.edges], dtype=int)
    temperature = scale * 0.25
    for _ in range(config.iterations):
        if count > config.octree_threshold:
            forces = _octree_repulsion(positions, config.repulsion, config.octree_theta)
        else:
            forces = _exact_repulsion(positions, config.repulsion)
        if len(edge_a):
            pull = config.spring * (positions[edge_b] - positions[edge_a])
            for axis in range(3):
                forces[:, axis] += np.bincount(edge_a, weights=pull[:, axis], minlength=count)
                forces[:, axis] -= np.bincount(edge_b, weights=pull[:, axis], minlength=count)
        norms = np.sqrt((forces * forces).sum(axis=1))
        step = np.minimum(norms, temperature)
        safe = np.maximum(norms, 1e-12)
        positions = positions + forces * (step / safe)[:, None]
        temperature *= config.cooling

    positions = positions - positions.mean(axis=0)
    return Embedding3D(positions, config.seed, config.iterations)


def edge_length_deviation(embedding: Embedding3D, graph: MapperGraph, natural_length: float) -> float:
    """Sum of squared deviations of edge lengths from the natural spring length."""
    total = 0.0
    for e in graph.edges:
        d = float(np.linalg.norm(embedding.positions[e.a] - embedding.positions[e.b]))
        total += (d - natural_length) ** 2
    return total


def component_spread(embedding: Embedding3D, partition: ComponentPartition) -> Embedding3D:
    """Rigidly translate components onto a coarse grid so bounding boxes stay disjoint."""
    if len(partition.component_of) != len(embedding.positions):
        raise GraphError("partition does not match embedding")
    count = partition.count
    if count <= 1:
        return embedding

    positions = embedding.positions.copy()
    component_of = np.asarray(partition.component_of)
    extents = []
    centers = []
    for cid in range(count):
        pts = positions[component_of == cid]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        extents.append(float((hi - lo).max()))
        centers.append((lo + hi) / 2.0)
    cell = max(extents) * 1.5 + 1.0
    grid = int(np.ceil(count ** (1.0 / 3.0)))
    for cid in range(count):
        gx, gy, gz = cid % grid, (cid // grid) % grid, cid // (grid * grid)
        target = (np.array([gx, gy, gz], dtype=float) - (grid - 1) / 2.0) * cell
        positions[component_of == cid] += target - centers[cid]
    return Embedding3D(positions, embedding.seed, embedding.iterations)
