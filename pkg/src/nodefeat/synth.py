"""Synthetic desk-scale datasets for demos and self-contained benchmarks.

Each generator mimics the signal structure of one benchmark family without
shipping any external data: community-partitioned citation-style graphs with
topic-word features (positional node labels), hub-hierarchy traffic-style
graphs whose labels are connectivity tiers (structural node labels), and
small-graph collections whose classes differ in degree and hub statistics.
All generators are deterministic functions of their seed.
"""

from __future__ import annotations

import numpy as np

from .features import FeatureMatrix, FeatureSpec
from .graph import Graph, GraphCollection, NodeLabels
from .datasets import NodeDataset
from .rng import Rng

__all__ = [
    "citation_like",
    "traffic_like",
    "molecule_like",
    "social_like",
    "DESK_NODE_DATASETS",
    "DESK_GRAPH_DATASETS",
    "make_desk_node_dataset",
    "make_desk_collection",
]


def _pair_graph(n: int, prob_fn, rng: Rng) -> Graph:
    """Sample an undirected graph from per-pair probabilities.

    ``prob_fn(u_idx, v_idx)`` receives index arrays of the upper-triangle
    pairs and returns edge probabilities.
    """
    iu, iv = np.triu_indices(n, k=1)
    p = prob_fn(iu, iv)
    draw = rng.uniform(iu.size)
    keep = draw < p
    edges = np.stack([iu[keep], iv[keep]], axis=1)
    return Graph.from_edge_list(edges, n)


def citation_like(
    num_classes: int = 7,
    per_class: int = 150,
    avg_within: float = 4.0,
    avg_between: float = 0.6,
    vocab: int = 300,
    words_per_doc: int = 18,
    topic_words: int = 30,
    word_noise: float = 0.15,
    name: str = "citation",
    seed: int = 7,
) -> NodeDataset:
    """Community-structured graph with topic bag-of-words node features.

    Node labels are community ids, so they are predictable from a node's
    position in the graph; features are binary word-presence vectors whose
    topics correlate with the label.
    """
    rng = Rng(seed)
    n = num_classes * per_class
    labels = np.repeat(np.arange(num_classes), per_class)
    p_in = min(1.0, avg_within / max(1, per_class - 1))
    p_out = min(1.0, avg_between / max(1, n - per_class))

    def prob(iu, iv):
        same = labels[iu] == labels[iv]
        return np.where(same, p_in, p_out)

    graph = _pair_graph(n, prob, rng.split("edges"))

    word_rng = rng.split("words")
    values = np.zeros((n, vocab))
    for v in range(n):
        c = labels[v]
        lo = (c * topic_words) % max(1, vocab - topic_words + 1)
        noise = word_rng.uniform(words_per_doc) < word_noise
        topical = lo + word_rng.integers(0, topic_words, size=words_per_doc)
        random_words = word_rng.integers(0, vocab, size=words_per_doc)
        words = np.where(noise, random_words, topical)
        values[v, words] = 1.0
    features = FeatureMatrix(values, FeatureSpec("real"))
    return NodeDataset(graph, NodeLabels(labels, num_classes), features, name)


def traffic_like(
    num_levels: int = 4,
    per_level: int = 33,
    base_degree: float = 3.0,
    tier_ratio: float = 2.3,
    weight_sigma: float = 0.35,
    name: str = "traffic",
    seed: int = 11,
) -> NodeDataset:
    """Hub-hierarchy graph whose labels are connectivity tiers.

    Expected degree grows geometrically with the (hidden) tier; edges follow
    a Chung-Lu product rule, so hubs of every tier attach across the whole
    graph and the label is a structural role rather than a community.
    """
    rng = Rng(seed)
    n = num_levels * per_level
    labels = np.repeat(np.arange(num_levels), per_level)
    jitter = np.exp(weight_sigma * rng.split("weights").normal(n, 1)[:, 0])
    weights = base_degree * (tier_ratio ** labels) * jitter
    total = weights.sum()

    def prob(iu, iv):
        return np.minimum(1.0, weights[iu] * weights[iv] / total)

    graph = _pair_graph(n, prob, rng.split("edges"))
    return NodeDataset(graph, NodeLabels(labels, num_levels), None, name)


def _random_tree(n: int, max_child_span: int, rng: Rng) -> list:
    """Random tree edges: each node attaches to a recent predecessor."""
    edges = []
    for v in range(1, n):
        lo = max(0, v - max_child_span)
        parent = int(rng.integers(lo, v))
        edges.append((parent, v))
    return edges


def _chorded_cycle(n: int, chords: int, rng: Rng) -> list:
    edges = [(i, (i + 1) % n) for i in range(n)]
    for _ in range(chords):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u != v:
            edges.append((u, v))
    return edges


def molecule_like(
    class_counts=(65, 55),
    size_range=(10, 20),
    num_atom_types: int = 5,
    name: str = "molecule",
    seed: int = 13,
) -> GraphCollection:
    """Two-class collection: tree-shaped graphs vs chorded-ring graphs.

    Tree graphs carry degree-1 leaves; ring graphs have none, so degree
    histograms separate the classes.  Random categorical "atom types" are
    attached as one-hot node attributes.
    """
    rng = Rng(seed)
    graphs, labels, features = [], [], []
    for cls, count in enumerate(class_counts):
        for i in range(count):
            child = rng.split(f"graph:{cls}:{i}")
            n = int(child.integers(size_range[0], size_range[1] + 1))
            if cls == 0:
                edges = _random_tree(n, 4, child)
            else:
                edges = _chorded_cycle(n, max(1, n // 5), child)
            graphs.append(Graph.from_edge_list(edges, n))
            labels.append(cls)
            types = child.integers(0, num_atom_types, size=n)
            onehot = np.zeros((n, num_atom_types))
            onehot[np.arange(n), types] = 1.0
            features.append(onehot)
    order = Rng(seed).split("order").permutation(len(graphs))
    return GraphCollection.from_graphs(
        [graphs[i] for i in order],
        [labels[i] for i in order],
        node_features=[features[i] for i in order],
    )


def _star_ego(n: int, extra_links: int, rng: Rng) -> list:
    edges = [(0, v) for v in range(1, n)]
    for _ in range(extra_links):
        u = int(rng.integers(1, n))
        v = int(rng.integers(1, n))
        if u != v:
            edges.append((u, v))
    return edges


def _dense_cluster(n: int, degree_target: int, rng: Rng) -> list:
    edges = []
    for u in range(n):
        others = np.delete(np.arange(n), u)
        picks = rng.choice(others, size=min(degree_target, n - 1), replace=False)
        edges.extend((u, int(v)) for v in picks)
    return edges


def social_like(
    class_counts=(80, 80),
    size_range=(12, 24),
    num_classes: int | None = None,
    name: str = "social",
    seed: int = 17,
) -> GraphCollection:
    """Ego-network style collection separated by hub structure.

    Class 0 graphs are single-hub stars with sparse peripheral links, class
    1 graphs are near-regular dense clusters, and an optional class 2 mixes
    two medium hubs.  PageRank and degree statistics differ strongly across
    classes; node identities carry almost no signal.
    """
    rng = Rng(seed)
    graphs, labels = [], []
    for cls, count in enumerate(class_counts):
        for i in range(count):
            child = rng.split(f"graph:{cls}:{i}")
            n = int(child.integers(size_range[0], size_range[1] + 1))
            if cls == 0:
                edges = _star_ego(n, n // 4, child)
            elif cls == 1:
                edges = _dense_cluster(n, 5, child)
            else:
                half = n // 2
                edges = [(0, v) for v in range(2, half)]
                edges += [(1, v) for v in range(half, n)]
                edges.append((0, 1))
                for _ in range(n // 3):
                    u = int(child.integers(2, n))
                    v = int(child.integers(2, n))
                    if u != v:
                        edges.append((u, v))
            graphs.append(Graph.from_edge_list(edges, n))
            labels.append(cls)
    order = Rng(seed).split("order").permutation(len(graphs))
    return GraphCollection.from_graphs(
        [graphs[i] for i in order], [labels[i] for i in order]
    )


# Desk-scale stand-ins keyed by the benchmark dataset names they mirror in
# size and task structure.  Used by `reproduce --synth` and the test suite
# when the corresponding real distributions are not on disk.

DESK_NODE_DATASETS = {
    "cora": lambda: citation_like(
        num_classes=7, per_class=150, name="cora", seed=101
    ),
    "citeseer": lambda: citation_like(
        num_classes=6, per_class=120, avg_within=3.0, word_noise=0.35,
        name="citeseer", seed=102,
    ),
    "pubmed": lambda: citation_like(
        num_classes=3, per_class=220, avg_within=3.5, word_noise=0.25,
        name="pubmed", seed=103,
    ),
    "brazil-air": lambda: traffic_like(per_level=33, name="brazil-air", seed=111),
    "europe-air": lambda: traffic_like(per_level=100, name="europe-air", seed=112),
    "usa-air": lambda: traffic_like(per_level=150, name="usa-air", seed=113),
}

DESK_GRAPH_DATASETS = {
    "MUTAG": lambda: molecule_like(name="MUTAG", seed=121),
    "PROTEINS": lambda: molecule_like(
        class_counts=(75, 65), size_range=(12, 30), name="PROTEINS", seed=122
    ),
    "IMDB-BINARY": lambda: social_like(name="IMDB-BINARY", seed=123),
    "IMDB-MULTI": lambda: social_like(
        class_counts=(50, 50, 50), name="IMDB-MULTI", seed=124
    ),
}


def make_desk_node_dataset(name: str) -> NodeDataset:
    if name not in DESK_NODE_DATASETS:
        raise KeyError(f"no desk-scale node dataset named {name!r}")
    return DESK_NODE_DATASETS[name]()


def make_desk_collection(name: str) -> GraphCollection:
    if name not in DESK_GRAPH_DATASETS:
        raise KeyError(f"no desk-scale graph collection named {name!r}")
    return DESK_GRAPH_DATASETS[name]()
