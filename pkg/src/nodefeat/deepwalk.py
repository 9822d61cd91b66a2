"""Random-walk corpus generation and skip-gram training for node embeddings.

Walks are uniform over neighbors and truncate at degree-zero nodes.  The
skip-gram objective with negative sampling is maximized by minibatched
stochastic gradient ascent; negatives are drawn from the corpus unigram
distribution raised to the 3/4 power.  Everything is deterministic under a
fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import TrainingDivergedError
from .graph import Graph
from .rng import Rng

__all__ = [
    "WalkParams",
    "WalkCorpus",
    "EmbeddingTable",
    "generate_walks",
    "train_skipgram",
    "deepwalk_embeddings",
]

_PAD = -1
_LR_FLOOR_FRACTION = 0.01  # linear decay ends at this fraction of the start lr


@dataclass(frozen=True)
class WalkParams:
    walk_len: int = 40
    walks_per_node: int = 10
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    batch_size: int = 4096

    def __post_init__(self):
        if self.walk_len < 1 or self.window < 1 or self.negatives < 1:
            raise ValueError("walk_len, window and negatives must be >= 1")
        if self.walks_per_node < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("walks_per_node, epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class WalkCorpus:
    """Fixed-width walk matrix; positions after truncation hold ``-1``."""

    walks: np.ndarray
    num_nodes: int

    @property
    def num_walks(self) -> int:
        return int(self.walks.shape[0])

    def sequences(self):
        """Iterate walks as python lists without padding."""
        for row in self.walks:
            end = np.argmax(row == _PAD) if (row == _PAD).any() else row.size
            yield row[:end].tolist()


@dataclass(frozen=True)
class EmbeddingTable:
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    # Mean objective before training followed by one entry per epoch.
    objective_history: list = field(default_factory=list)


def generate_walks(g: Graph, params: WalkParams, rng: Rng) -> WalkCorpus:
    """``walks_per_node`` uniform random walks from every node."""
    n = g.num_nodes
    deg = g.degrees
    starts = np.repeat(np.arange(n, dtype=np.int64), params.walks_per_node)
    walks = np.full((starts.size, params.walk_len), _PAD, dtype=np.int64)
    walks[:, 0] = starts
    cur = starts.copy()
    alive = deg[cur] > 0
    stream = rng.split("walk-steps")
    for t in range(1, params.walk_len):
        if not alive.any():
            break
        active = np.flatnonzero(alive)
        u = stream.uniform(active.size)
        d = deg[cur[active]]
        pick = np.minimum((u * d).astype(np.int64), d - 1)
        nxt = g.csr_neighbors[g.csr_offsets[cur[active]] + pick]
        walks[active, t] = nxt
        cur[active] = nxt
        alive[active] = deg[nxt] > 0
    return WalkCorpus(walks, n)


def _skipgram_pairs(walks: np.ndarray, window: int):
    """All ordered (center, context) pairs within the window, both directions."""
    centers, contexts = [], []
    for off in range(1, window + 1):
        if off >= walks.shape[1]:
            break
        a = walks[:, :-off].ravel()
        b = walks[:, off:].ravel()
        ok = (a != _PAD) & (b != _PAD)
        centers.append(a[ok])
        contexts.append(b[ok])
        centers.append(b[ok])
        contexts.append(a[ok])
    if not centers:
        return (np.zeros(0, dtype=np.int64),) * 2
    return np.concatenate(centers), np.concatenate(contexts)


def _unigram_cdf(walks: np.ndarray, num_nodes: int) -> np.ndarray:
    tokens = walks[walks != _PAD]
    counts = np.bincount(tokens, minlength=num_nodes).astype(np.float64)
    weights = counts ** 0.75
    total = weights.sum()
    if total == 0.0:
        weights = np.ones(num_nodes)
        total = float(num_nodes)
    return np.cumsum(weights / total)


def _stable_log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sgns_batch(vin, vout, centers, contexts, negatives):
    """Objective and gradients of the skip-gram negative-sampling batch.

    Returns ``(mean_objective, grad_centers, grad_contexts, grad_negatives)``
    where gradients are ascent directions aligned with the input index arrays.
    """
    vw = vin[centers]
    uc = vout[contexts]
    un = vout[negatives]
    pos_score = (vw * uc).sum(axis=1)
    neg_score = np.einsum("bd,bkd->bk", vw, un)
    obj = _stable_log_sigmoid(pos_score).sum() + _stable_log_sigmoid(-neg_score).sum(axis=1).sum()
    g_pos = 1.0 - _sigmoid(pos_score)
    g_neg = _sigmoid(neg_score)
    grad_vw = g_pos[:, None] * uc - np.einsum("bk,bkd->bd", g_neg, un)
    grad_uc = g_pos[:, None] * vw
    grad_un = -g_neg[..., None] * vw[:, None, :]
    return obj / centers.size, grad_vw, grad_uc, grad_un


def _scatter_step(target: np.ndarray, idx: np.ndarray, updates: np.ndarray,
                  lr: float) -> None:
    """Apply ``lr`` times the per-row mean of ``updates`` grouped by ``idx``.

    Averaging (rather than summing) the pair gradients that hit one
    embedding row keeps the per-batch step bounded by ``lr`` even when a
    small graph makes every row appear hundreds of times per batch.
    """
    n, d = target.shape
    flat = np.bincount(
        (idx[:, None] * d + np.arange(d)).ravel(),
        weights=updates.ravel(),
        minlength=n * d,
    ).reshape(n, d)
    counts = np.bincount(idx, minlength=n)
    target += flat * (lr / np.maximum(counts, 1))[:, None]


def train_skipgram(corpus: WalkCorpus, dim: int, params: WalkParams, rng: Rng) -> EmbeddingTable:
    """Train input/output embeddings on the walk corpus."""
    centers, contexts = _skipgram_pairs(corpus.walks, params.window)
    if centers.size == 0:
        raise ValueError("corpus produced no training pairs")
    n = corpus.num_nodes
    cdf = _unigram_cdf(corpus.walks, n)

    vin = (rng.split("init").uniform((n, dim)) - 0.5) / dim
    vout = np.zeros((n, dim))
    neg_stream = rng.split("negatives")
    order_stream = rng.split("order")

    total = centers.size
    batches_per_epoch = (total + params.batch_size - 1) // params.batch_size
    total_batches = max(1, params.epochs * batches_per_epoch)
    lr0 = params.learning_rate
    lr_floor = lr0 * _LR_FLOOR_FRACTION

    history = [_evaluate_objective(vin, vout, centers, contexts, cdf, params, rng)]
    batch_index = 0
    for _ in range(params.epochs):
        order = order_stream.permutation(total)
        obj_sum = 0.0
        for start in range(0, total, params.batch_size):
            idx = order[start : start + params.batch_size]
            c = centers[idx]
            o = contexts[idx]
            negs = np.searchsorted(cdf, neg_stream.uniform((idx.size, params.negatives)))
            frac = batch_index / max(1, total_batches - 1)
            lr = lr0 + (lr_floor - lr0) * frac
            obj, g_vw, g_uc, g_un = sgns_batch(vin, vout, c, o, negs)
            obj_sum += obj * idx.size
            _scatter_step(vin, c, g_vw, lr)
            _scatter_step(vout, o, g_uc, lr)
            _scatter_step(vout, negs.ravel(), g_un.reshape(-1, dim), lr)
            batch_index += 1
        epoch_obj = obj_sum / total
        if not (np.isfinite(epoch_obj) and np.isfinite(vin).all() and np.isfinite(vout).all()):
            raise TrainingDivergedError(
                "skip-gram objective became non-finite (learning rate too high?)"
            )
        history.append(float(epoch_obj))
    return EmbeddingTable(vin, vout, history)


def _evaluate_objective(vin, vout, centers, contexts, cdf, params, rng) -> float:
    """Mean objective over all pairs with a dedicated negative stream."""
    stream = rng.split("eval-negatives")
    total = 0.0
    for start in range(0, centers.size, params.batch_size):
        c = centers[start : start + params.batch_size]
        o = contexts[start : start + params.batch_size]
        negs = np.searchsorted(cdf, stream.uniform((c.size, params.negatives)))
        obj, _, _, _ = sgns_batch(vin, vout, c, o, negs)
        total += obj * c.size
    return float(total / centers.size)


def deepwalk_embeddings(g: Graph, dim: int, params: WalkParams, rng: Rng) -> EmbeddingTable:
    """Full pipeline: generate walks, then train skip-gram embeddings."""
    corpus = generate_walks(g, params, rng.split("walks"))
    return train_skipgram(corpus, dim, params, rng.split("skipgram"))
