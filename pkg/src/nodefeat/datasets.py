"""Dataset loading and train/validation/test splitting.

Node-task datasets live in a directory of text files: ``edges.tsv`` with one
``src<TAB>dst`` pair per line, ``labels.tsv`` with one ``node_id<TAB>class``
line per node (``-1`` marks unlabeled), and an optional ``features.tsv`` of
tab-separated floats.  Graph-task datasets use the common TU text layout
(1-indexed, comma-separated ``NAME_A.txt`` plus indicator and label files).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix, load_real_features, save_features
from .graph import Graph, GraphCollection, NodeLabels, UNLABELED
from .rng import Rng

__all__ = [
    "DatasetFormatError",
    "NodeDataset",
    "SplitSpec",
    "load_node_dataset",
    "save_node_dataset",
    "load_tudataset",
    "save_tudataset",
    "split_per_class",
    "split_fraction",
    "stratified_kfold",
]


class DatasetFormatError(ValueError):
    """Raised for missing files or malformed dataset content."""


@dataclass(frozen=True)
class NodeDataset:
    graph: Graph
    labels: NodeLabels
    real_features: FeatureMatrix | None
    name: str


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint train/validation/test id sets (node ids or graph ids)."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for attr in ("train", "val", "test"):
            object.__setattr__(
                self, attr, np.asarray(getattr(self, attr), dtype=np.int64)
            )
        combined = np.concatenate([self.train, self.val, self.test])
        if np.unique(combined).size != combined.size:
            raise ValueError("split sets must be pairwise disjoint")


def _int_fields(path, expected: int, sep: str | None = "\t"):
    """Yield (lineno, fields) of integer rows, validating field counts."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(sep) if sep else line.split()
            if len(parts) != expected:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected {expected} fields, got {len(parts)}"
                )
            try:
                yield lineno, [int(p.strip()) for p in parts]
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from exc


def _require(path) -> str:
    if not os.path.isfile(path):
        raise DatasetFormatError(f"missing required file {path}")
    return path


def load_node_dataset(directory) -> NodeDataset:
    """Load a canonical node-task dataset directory.

    ``labels.tsv`` defines the node count: it must contain exactly one line
    per node with ids covering ``0..n-1``.
    """
    directory = str(directory)
    edges_path = _require(os.path.join(directory, "edges.tsv"))
    labels_path = _require(os.path.join(directory, "labels.tsv"))

    rows = list(_int_fields(labels_path, 2))
    n = len(rows)
    labels = np.full(n, UNLABELED, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    for lineno, (node, cls) in rows:
        if not 0 <= node < n:
            raise DatasetFormatError(
                f"{labels_path}:{lineno}: node id {node} out of range for {n} nodes"
            )
        if seen[node]:
            raise DatasetFormatError(
                f"{labels_path}:{lineno}: duplicate node id {node}"
            )
        seen[node] = True
        labels[node] = cls
    observed = np.unique(labels[labels != UNLABELED])
    if observed.size and not np.array_equal(observed, np.arange(observed.size)):
        raise DatasetFormatError(
            f"{labels_path}: class ids must be contiguous from 0, got {observed.tolist()}"
        )
    num_classes = int(observed.size)

    edges = []
    for lineno, (u, v) in _int_fields(edges_path, 2):
        if not (0 <= u < n and 0 <= v < n):
            raise DatasetFormatError(
                f"{edges_path}:{lineno}: edge ({u}, {v}) out of range for {n} nodes"
            )
        edges.append((u, v))
    graph = Graph.from_edge_list(edges, n)

    features = None
    features_path = os.path.join(directory, "features.tsv")
    if os.path.isfile(features_path):
        fm = load_real_features(features_path, graph)
        features = fm
    return NodeDataset(
        graph=graph,
        labels=NodeLabels(labels, num_classes),
        real_features=features,
        name=os.path.basename(os.path.normpath(directory)),
    )


def save_node_dataset(ds: NodeDataset, directory) -> None:
    """Write a NodeDataset back to the canonical text layout."""
    directory = str(directory)
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "edges.tsv"), "w", encoding="utf-8") as fh:
        for u, v in ds.graph.edge_list():
            fh.write(f"{u}\t{v}\n")
    with open(os.path.join(directory, "labels.tsv"), "w", encoding="utf-8") as fh:
        for node, cls in enumerate(ds.labels.labels):
            fh.write(f"{node}\t{cls}\n")
    if ds.real_features is not None:
        save_features(os.path.join(directory, "features.tsv"), ds.real_features)


def load_tudataset(directory, name: str) -> GraphCollection:
    """Load a TU-format graph classification dataset.

    Node labels (if present) become one-hot per-node features; node
    attributes (if present) are used verbatim instead.
    """
    directory = str(directory)
    prefix = os.path.join(directory, name)
    adj_path = _require(prefix + "_A.txt")
    ind_path = _require(prefix + "_graph_indicator.txt")
    lab_path = _require(prefix + "_graph_labels.txt")

    indicator = np.array([f[0] for _, f in _int_fields(ind_path, 1, sep=None)])
    total_nodes = indicator.size
    if total_nodes == 0:
        raise DatasetFormatError(f"{ind_path}: empty graph indicator")
    graph_ids = np.unique(indicator)
    if graph_ids[0] != 1 or graph_ids[-1] != graph_ids.size:
        raise DatasetFormatError(
            f"{ind_path}: graph ids must be contiguous starting at 1"
        )
    num_graphs = int(graph_ids.size)
    # Local node index within its own graph; nodes appear in ascending order.
    local_index = np.zeros(total_nodes, dtype=np.int64)
    sizes = np.bincount(indicator, minlength=num_graphs + 1)[1:]
    starts = np.zeros(num_graphs, dtype=np.int64)
    np.cumsum(sizes[:-1], out=starts[1:])
    local_index = np.arange(total_nodes) - starts[indicator - 1]

    per_graph_edges: list[list] = [[] for _ in range(num_graphs)]
    for lineno, (u, v) in _int_fields(adj_path, 2, sep=","):
        if not (1 <= u <= total_nodes and 1 <= v <= total_nodes):
            raise DatasetFormatError(
                f"{adj_path}:{lineno}: node id out of range ({u}, {v})"
            )
        gu, gv = indicator[u - 1], indicator[v - 1]
        if gu != gv:
            raise DatasetFormatError(
                f"{adj_path}:{lineno}: edge between node {u} (graph {gu}) and "
                f"node {v} (graph {gv}) crosses a graph boundary"
            )
        per_graph_edges[gu - 1].append((local_index[u - 1], local_index[v - 1]))

    raw_labels = np.array([f[0] for _, f in _int_fields(lab_path, 1, sep=None)])
    if raw_labels.size != num_graphs:
        raise DatasetFormatError(
            f"{lab_path}: {raw_labels.size} labels for {num_graphs} graphs"
        )
    classes = np.unique(raw_labels)
    remap = {int(c): i for i, c in enumerate(classes)}
    labels = np.array([remap[int(c)] for c in raw_labels], dtype=np.int64)

    graphs = [
        Graph.from_edge_list(per_graph_edges[i], int(sizes[i]))
        for i in range(num_graphs)
    ]

    node_features = _load_tu_node_features(prefix, indicator, sizes, starts)
    return GraphCollection.from_graphs(graphs, labels, node_features=node_features)


def _load_tu_node_features(prefix, indicator, sizes, starts):
    attr_path = prefix + "_node_attributes.txt"
    nl_path = prefix + "_node_labels.txt"
    if os.path.isfile(attr_path):
        rows = []
        with open(attr_path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append([float(p) for p in line.split(",")])
                except ValueError as exc:
                    raise DatasetFormatError(f"{attr_path}:{lineno}: {exc}") from exc
        values = np.asarray(rows, dtype=np.float64)
    elif os.path.isfile(nl_path):
        raw = np.array([f[0] for _, f in _int_fields(nl_path, 1, sep=None)])
        classes = np.unique(raw)
        remap = {int(c): i for i, c in enumerate(classes)}
        values = np.zeros((raw.size, classes.size))
        for i, c in enumerate(raw):
            values[i, remap[int(c)]] = 1.0
    else:
        return None
    if values.shape[0] != indicator.size:
        raise DatasetFormatError(
            f"{prefix}: {values.shape[0]} node feature rows for "
            f"{indicator.size} nodes"
        )
    return [
        values[starts[i] : starts[i] + sizes[i]].copy() for i in range(sizes.size)
    ]


def save_tudataset(coll: GraphCollection, directory, name: str) -> None:
    """Write a collection in the TU text layout (1-indexed, both edge directions)."""
    directory = str(directory)
    os.makedirs(directory, exist_ok=True)
    prefix = os.path.join(directory, name)
    offsets = np.zeros(len(coll.graphs) + 1, dtype=np.int64)
    np.cumsum([g.num_nodes for g in coll.graphs], out=offsets[1:])
    with open(prefix + "_A.txt", "w", encoding="utf-8") as fh:
        for gi, g in enumerate(coll.graphs):
            base = offsets[gi] + 1
            src = np.repeat(np.arange(g.num_nodes, dtype=np.int64), g.degrees)
            for u, v in zip(src, g.csr_neighbors):
                fh.write(f"{base + u}, {base + v}\n")
    with open(prefix + "_graph_indicator.txt", "w", encoding="utf-8") as fh:
        for gi, g in enumerate(coll.graphs):
            fh.write(f"{gi + 1}\n" * g.num_nodes)
    with open(prefix + "_graph_labels.txt", "w", encoding="utf-8") as fh:
        for label in coll.graph_labels:
            fh.write(f"{label}\n")
    if coll.node_features is not None:
        with open(prefix + "_node_attributes.txt", "w", encoding="utf-8") as fh:
            for feats in coll.node_features:
                for row in feats:
                    fh.write(", ".join(repr(float(x)) for x in row) + "\n")


def split_per_class(
    labels: NodeLabels, per_class: int = 20, val_size: int = 500, rng: Rng | None = None
) -> SplitSpec:
    """Fixed number of training nodes per class, then a validation pool.

    Train holds ``per_class`` random nodes from every class; ``val_size``
    nodes are drawn from the labeled remainder; everything else is test.
    """
    rng = rng or Rng(0)
    train_parts = []
    for c in range(labels.num_classes):
        ids = np.flatnonzero(labels.labels == c)
        if ids.size < per_class:
            raise ValueError(
                f"class {c} has {ids.size} labeled nodes, needs >= {per_class}"
            )
        train_parts.append(np.sort(rng.choice(ids, size=per_class, replace=False)))
    train = np.sort(np.concatenate(train_parts))
    remainder = np.setdiff1d(labels.labeled_ids(), train, assume_unique=True)
    if remainder.size < val_size:
        raise ValueError(
            f"need {val_size} validation nodes but only {remainder.size} remain"
        )
    val = np.sort(rng.choice(remainder, size=val_size, replace=False))
    test = np.setdiff1d(remainder, val, assume_unique=True)
    return SplitSpec(train=train, val=val, test=test)


def _stratified_take(ids_by_class, fractions, rng):
    """Largest-remainder stratified draw of round(frac * total) items."""
    quotas = np.array([len(ids) * fractions for ids in ids_by_class])
    base = np.floor(quotas).astype(np.int64)
    short = int(round(quotas.sum())) - int(base.sum())
    if short > 0:
        order = np.argsort(-(quotas - base), kind="stable")
        base[order[:short]] += 1
    taken, left = [], []
    for ids, take in zip(ids_by_class, base):
        perm = rng.permutation(len(ids))
        ids = np.asarray(ids)[perm]
        taken.append(ids[:take])
        left.append(ids[take:])
    return np.sort(np.concatenate(taken)), [np.sort(l) for l in left]


def split_fraction(
    labels: NodeLabels,
    train_frac: float = 0.8,
    rng: Rng | None = None,
    val_frac: float = 0.0,
) -> SplitSpec:
    """Class-stratified split with ``train_frac`` of labeled nodes in train.

    ``val_frac`` carves a validation holdout out of the drawn training set
    (as a fraction of that set); the non-train remainder is test.
    """
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must lie strictly between 0 and 1")
    if not 0.0 <= val_frac < 1.0:
        raise ValueError("val_frac must lie in [0, 1)")
    rng = rng or Rng(0)
    ids_by_class = [
        np.flatnonzero(labels.labels == c) for c in range(labels.num_classes)
    ]
    train_full, rest = _stratified_take(ids_by_class, train_frac, rng.split("train"))
    test = np.sort(np.concatenate(rest)) if rest else np.zeros(0, dtype=np.int64)
    if val_frac > 0.0:
        train_by_class = [
            train_full[np.isin(train_full, ids)] for ids in ids_by_class
        ]
        val, kept = _stratified_take(train_by_class, val_frac, rng.split("val"))
        train = np.sort(np.concatenate(kept))
    else:
        train, val = train_full, np.zeros(0, dtype=np.int64)
    return SplitSpec(train=train, val=val, test=test)


def stratified_kfold(
    graph_labels, k: int = 10, rng: Rng | None = None
) -> list[SplitSpec]:
    """Class-stratified k folds; every item lands in exactly one test fold."""
    rng = rng or Rng(0)
    labels = np.asarray(graph_labels, dtype=np.int64)
    num_classes = int(labels.max()) + 1 if labels.size else 0
    folds: list[list] = [[] for _ in range(k)]
    pointer = 0
    for c in range(num_classes):
        ids = np.flatnonzero(labels == c)
        if ids.size < k:
            raise ValueError(f"class {c} has {ids.size} items, needs >= {k} for k folds")
        ids = ids[rng.split(f"class:{c}").permutation(ids.size)]
        for item in ids:
            folds[pointer % k].append(int(item))
            pointer += 1
    all_ids = np.arange(labels.size, dtype=np.int64)
    splits = []
    for fold in folds:
        test = np.sort(np.asarray(fold, dtype=np.int64))
        train = np.setdiff1d(all_ids, test, assume_unique=True)
        splits.append(SplitSpec(train=train, val=np.zeros(0, dtype=np.int64), test=test))
    return splits
