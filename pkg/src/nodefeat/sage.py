"""Trainable GraphSAGE with mean/sum aggregation and mean/sum readout.

A layer concatenates each node's own representation with the aggregate of
its (optionally sampled) neighborhood, applies one linear map and a ReLU.
Node tasks stack layers and end with a linear head over nodes; graph tasks
pool node embeddings with a mean or sum readout before the head.  Neighbor
sampling is redrawn on every training forward; evaluation always uses full
neighborhoods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .autodiff import (
    Adam,
    Tensor,
    TrainingDivergedError,
    add_bias,
    concat_cols,
    cross_entropy,
    matmul,
    mul_array,
    relu,
    spmm,
)
from .graph import Graph
from .rng import Rng

__all__ = [
    "ModelConfig",
    "SageLayer",
    "SageModel",
    "sample_neighbors",
    "aggregation_operator",
    "readout_operator",
    "disjoint_union",
    "accuracy",
    "cross_entropy",
    "Adam",
    "TrainingDivergedError",
]

AGGREGATORS = ("mean", "sum")
READOUTS = ("mean", "sum", "none")


@dataclass(frozen=True)
class ModelConfig:
    num_layers: int = 2
    hidden_dim: int = 64
    aggregator: str = "mean"
    readout: str = "none"
    sample_size: int = 0  # 0 keeps the full neighborhood
    learning_rate: float = 0.01
    epochs: int = 100
    dropout: float = 0.0

    def __post_init__(self):
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        if self.aggregator not in AGGREGATORS:
            raise ValueError(f"aggregator must be one of {AGGREGATORS}")
        if self.readout not in READOUTS:
            raise ValueError(f"readout must be one of {READOUTS}")
        if self.sample_size < 0:
            raise ValueError("sample_size must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")


def sample_neighbors(g: Graph, v: int, s: int, rng: Rng | None = None) -> np.ndarray:
    """Up to ``s`` distinct neighbors of ``v``; ``s=0`` means the full list."""
    nbrs = g.neighbors(v)
    if s == 0 or nbrs.size <= s:
        return nbrs
    assert rng is not None, "sampling requires an rng"
    return np.sort(rng.choice(nbrs, size=s, replace=False))


def aggregation_operator(
    g: Graph, aggregator: str, sample_size: int = 0, rng: Rng | None = None
) -> sp.csr_matrix:
    """Sparse matrix whose product with H aggregates neighbor rows.

    Mean rows hold 1/|S(v)|, sum rows hold 1; rows of nodes with empty
    (sampled) neighborhoods are zero.
    """
    if aggregator not in AGGREGATORS:
        raise ValueError(f"aggregator must be one of {AGGREGATORS}")
    n = g.num_nodes
    if sample_size == 0:
        cols = g.csr_neighbors.copy()
        offsets = g.csr_offsets.copy()
    else:
        picks = [sample_neighbors(g, v, sample_size, rng) for v in range(n)]
        counts = np.fromiter((p.size for p in picks), dtype=np.int64, count=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        cols = np.concatenate(picks) if n else np.zeros(0, dtype=np.int64)
    sizes = np.diff(offsets)
    if aggregator == "sum":
        data = np.ones(cols.shape[0])
    else:
        inv = np.zeros(n)
        nz = sizes > 0
        inv[nz] = 1.0 / sizes[nz]
        data = np.repeat(inv, sizes)
    return sp.csr_matrix((data, cols, offsets), shape=(n, n))


def readout_operator(sizes, kind: str) -> sp.csr_matrix:
    """Pooling matrix (num_graphs x total_nodes) for mean or sum readout."""
    if kind not in ("mean", "sum"):
        raise ValueError("readout must be 'mean' or 'sum'")
    sizes = np.asarray(sizes, dtype=np.int64)
    total = int(sizes.sum())
    offsets = np.zeros(sizes.size + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    cols = np.arange(total, dtype=np.int64)
    if kind == "sum":
        data = np.ones(total)
    else:
        data = np.repeat(1.0 / np.maximum(sizes, 1), sizes)
    return sp.csr_matrix((data, cols, offsets), shape=(sizes.size, total))


def disjoint_union(graphs) -> tuple[Graph, np.ndarray]:
    """One big graph holding every input graph on shifted node ids."""
    sizes = np.array([g.num_nodes for g in graphs], dtype=np.int64)
    total = int(sizes.sum())
    offsets = np.zeros(total + 1, dtype=np.int64)
    cols = []
    base = 0
    pos = 0
    for g in graphs:
        n = g.num_nodes
        offsets[pos + 1 : pos + n + 1] = g.csr_offsets[1:] + (offsets[pos])
        cols.append(g.csr_neighbors + base)
        base += n
        pos += n
    neighbors = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    return Graph(total, offsets, neighbors), sizes


def _glorot(rows: int, cols: int, rng: Rng) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return (rng.uniform((rows, cols)) * 2.0 - 1.0) * limit


class SageLayer:
    """ReLU(W [h_v || agg(h_u)] + b) with a fixed aggregator."""

    def __init__(self, in_dim: int, out_dim: int, aggregator: str, rng: Rng):
        if aggregator not in AGGREGATORS:
            raise ValueError(f"aggregator must be one of {AGGREGATORS}")
        self.aggregator = aggregator
        self.W = Tensor(_glorot(2 * in_dim, out_dim, rng), requires_grad=True)
        self.b = Tensor(np.zeros((1, out_dim)), requires_grad=True)

    def forward(self, h: Tensor, agg_op: sp.csr_matrix) -> Tensor:
        if h.values.shape[0] != agg_op.shape[0]:
            raise ValueError(
                f"feature rows ({h.values.shape[0]}) do not match "
                f"graph nodes ({agg_op.shape[0]})"
            )
        neigh = spmm(agg_op, h)
        z = add_bias(matmul(concat_cols(h, neigh), self.W), self.b)
        return relu(z)


class SageModel:
    """Stacked SageLayers plus a linear classification head."""

    def __init__(self, in_dim: int, num_classes: int, config: ModelConfig, rng: Rng):
        self.config = config
        dims = [in_dim] + [config.hidden_dim] * config.num_layers
        self.layers = [
            SageLayer(dims[i], dims[i + 1], config.aggregator, rng.split(f"layer:{i}"))
            for i in range(config.num_layers)
        ]
        self.head_W = Tensor(
            _glorot(config.hidden_dim, num_classes, rng.split("head")),
            requires_grad=True,
        )
        self.head_b = Tensor(np.zeros((1, num_classes)), requires_grad=True)

    def parameters(self) -> list[Tensor]:
        params = []
        for layer in self.layers:
            params.extend([layer.W, layer.b])
        params.extend([self.head_W, self.head_b])
        return params

    def node_embeddings(
        self, g: Graph, X, rng: Rng | None = None, training: bool = False
    ) -> Tensor:
        """Node representations after all layers (before the head)."""
        if isinstance(X, Tensor):
            h = X
        else:
            values = X.values if hasattr(X, "values") else np.asarray(X, dtype=np.float64)
            h = Tensor(values)
        cfg = self.config
        sample = cfg.sample_size if training else 0
        for i, layer in enumerate(self.layers):
            op_rng = rng.split(f"sample:{i}") if (rng is not None and sample) else None
            op = aggregation_operator(g, cfg.aggregator, sample, op_rng)
            h = layer.forward(h, op)
            if training and cfg.dropout > 0.0:
                assert rng is not None, "dropout requires an rng"
                keep = (
                    rng.split(f"dropout:{i}").uniform(h.values.shape) >= cfg.dropout
                ).astype(np.float64)
                h = mul_array(h, keep / (1.0 - cfg.dropout))
        return h

    def forward_nodes(
        self, g: Graph, X, rng: Rng | None = None, training: bool = False
    ) -> Tensor:
        """Per-node class logits (N x C); requires readout='none'."""
        if self.config.readout != "none":
            raise ValueError("node forward requires readout='none'")
        h = self.node_embeddings(g, X, rng, training)
        return add_bias(matmul(h, self.head_W), self.head_b)

    def forward_graph_batch(
        self,
        union: Graph,
        sizes,
        X,
        rng: Rng | None = None,
        training: bool = False,
    ) -> Tensor:
        """Logits (num_graphs x C) for a disjoint union of graphs."""
        if self.config.readout == "none":
            raise ValueError("graph forward requires readout='mean' or 'sum'")
        h = self.node_embeddings(union, X, rng, training)
        pooled = spmm(readout_operator(sizes, self.config.readout), h)
        return add_bias(matmul(pooled, self.head_W), self.head_b)

    def forward_graph(
        self, g: Graph, X, rng: Rng | None = None, training: bool = False
    ) -> Tensor:
        """Class logits of a single graph (shape 1 x C)."""
        return self.forward_graph_batch(g, [g.num_nodes], X, rng, training)


def accuracy(logits: np.ndarray, labels: np.ndarray, mask) -> float:
    """Percent of correctly classified items in ``mask``."""
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("accuracy over an empty mask")
    pred = logits[mask].argmax(axis=1)
    return 100.0 * float((pred == np.asarray(labels)[mask]).mean())
