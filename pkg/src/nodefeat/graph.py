"""Immutable undirected graphs in compressed sparse row form.

A :class:`Graph` stores symmetric adjacency as sorted CSR arrays.  Self-loops
are stripped and directed input edges are symmetrized at construction, so
degree semantics stay unambiguous for every feature built on top.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "GraphCollection",
    "NodeLabels",
    "GraphConstructionError",
    "normalized_adjacency",
]

UNLABELED = -1


class GraphConstructionError(ValueError):
    """Raised when edge or label data cannot form a valid graph."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph: ``csr_offsets[v]:csr_offsets[v+1]`` slices neighbors of v."""

    num_nodes: int
    csr_offsets: np.ndarray
    csr_neighbors: np.ndarray

    @classmethod
    def from_edge_list(cls, edges, num_nodes: int) -> "Graph":
        """Build a symmetrized, deduplicated, self-loop-free graph.

        ``edges`` is an iterable of ``(u, v)`` pairs with ids in
        ``[0, num_nodes)``; isolated nodes are permitted.
        """
        num_nodes = int(num_nodes)
        if num_nodes < 0:
            raise GraphConstructionError("num_nodes must be non-negative")
        e = np.asarray(list(edges), dtype=np.int64)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise GraphConstructionError("edges must be (u, v) pairs")
        bad = (e < 0) | (e >= num_nodes)
        if bad.any():
            i = int(np.argwhere(bad.any(axis=1))[0][0])
            raise GraphConstructionError(
                f"edge ({e[i, 0]}, {e[i, 1]}) out of range for {num_nodes} nodes"
            )
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        keep = src != dst
        pairs = np.stack([src[keep], dst[keep]], axis=1)
        if pairs.shape[0]:
            pairs = np.unique(pairs, axis=0)
        counts = np.bincount(pairs[:, 0], minlength=num_nodes)
        offsets = np.zeros(num_nodes + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(num_nodes, offsets, np.ascontiguousarray(pairs[:, 1]))

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.csr_offsets)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return int(self.csr_neighbors.shape[0]) // 2

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.num_nodes else 0

    def degree(self, v: int) -> int:
        self._check_node(v)
        return int(self.csr_offsets[v + 1] - self.csr_offsets[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of ``v`` (a read-only view)."""
        self._check_node(v)
        return self.csr_neighbors[self.csr_offsets[v] : self.csr_offsets[v + 1]]

    def edge_list(self) -> np.ndarray:
        """Undirected edges as (u, v) pairs with u < v, lexicographically sorted."""
        src = np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.degrees)
        mask = src < self.csr_neighbors
        return np.stack([src[mask], self.csr_neighbors[mask]], axis=1)

    def adjacency(self) -> sp.csr_matrix:
        """Binary adjacency matrix (symmetric, zero diagonal)."""
        data = np.ones(self.csr_neighbors.shape[0], dtype=np.float64)
        return sp.csr_matrix(
            (data, self.csr_neighbors.copy(), self.csr_offsets.copy()),
            shape=(self.num_nodes, self.num_nodes),
        )

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.num_nodes:
            raise IndexError(f"node {v} out of range for {self.num_nodes} nodes")


def normalized_adjacency(g: Graph) -> sp.csr_matrix:
    """Degree-normalized adjacency: entry (u, v) = 1/sqrt(d(u) d(v)) per edge.

    Rows and columns of isolated nodes are all-zero by convention.
    """
    deg = g.degrees.astype(np.float64)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    src = np.repeat(np.arange(g.num_nodes, dtype=np.int64), g.degrees)
    data = inv_sqrt[src] * inv_sqrt[g.csr_neighbors]
    return sp.csr_matrix(
        (data, g.csr_neighbors.copy(), g.csr_offsets.copy()),
        shape=(g.num_nodes, g.num_nodes),
    )


@dataclass(frozen=True)
class NodeLabels:
    """Per-node class ids; ``-1`` marks unlabeled nodes."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        valid = labels[labels != UNLABELED]
        if valid.size and (valid.min() < 0 or valid.max() >= self.num_classes):
            raise GraphConstructionError(
                f"label values must lie in [0, {self.num_classes})"
            )

    @property
    def num_nodes(self) -> int:
        return int(self.labels.shape[0])

    def labeled_ids(self) -> np.ndarray:
        return np.flatnonzero(self.labels != UNLABELED)

    def class_counts(self) -> np.ndarray:
        valid = self.labels[self.labels != UNLABELED]
        return np.bincount(valid, minlength=self.num_classes)


@dataclass(frozen=True)
class GraphCollection:
    """A labeled set of graphs sharing one classification target.

    ``node_features`` optionally carries one float matrix per graph (real
    features from the source files).
    """

    graphs: list
    graph_labels: np.ndarray
    global_max_degree: int = field(default=0)
    global_max_nodes: int = field(default=0)
    node_features: list | None = field(default=None)

    @classmethod
    def from_graphs(cls, graphs, graph_labels, node_features=None) -> "GraphCollection":
        labels = np.asarray(graph_labels, dtype=np.int64)
        if len(graphs) != labels.shape[0]:
            raise GraphConstructionError("one label per graph required")
        if labels.size:
            classes = np.unique(labels)
            if classes[0] != 0 or classes[-1] != classes.size - 1:
                raise GraphConstructionError(
                    "graph labels must be contiguous ids 0..C-1"
                )
        if node_features is not None:
            if len(node_features) != len(graphs):
                raise GraphConstructionError("one feature matrix per graph required")
            for g, feats in zip(graphs, node_features):
                if feats.shape[0] != g.num_nodes:
                    raise GraphConstructionError(
                        "feature rows must match graph node count"
                    )
        max_deg = max((g.max_degree for g in graphs), default=0)
        max_nodes = max((g.num_nodes for g in graphs), default=0)
        return cls(list(graphs), labels, max_deg, max_nodes, node_features)

    @property
    def num_graphs(self) -> int:
        return len(self.graphs)

    @property
    def num_classes(self) -> int:
        return int(self.graph_labels.max()) + 1 if self.graph_labels.size else 0
