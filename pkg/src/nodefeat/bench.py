"""Benchmark orchestration: trials, grid search, and result tables.

A trial fixes (dataset, feature recipe, model) and repeats it over seeds.
Per seed everything is re-derived from the seed alone: the split, the
feature matrix (only random and deepwalk features actually change), model
initialization, and training-time randomness.  Epoch selection picks the
epoch with the best validation accuracy and reports the test accuracy at
that epoch.
"""

from __future__ import annotations

import csv
import io
import itertools
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .autodiff import Adam, TrainingDivergedError, cross_entropy
from .datasets import (
    NodeDataset,
    SplitSpec,
    load_node_dataset,
    load_tudataset,
    split_fraction,
    split_per_class,
    stratified_kfold,
)
from .features import (
    FeatureSpec,
    build_collection_features,
    build_features,
    feature_type,
)
from .graph import GraphCollection
from .rng import Rng
from .sage import ModelConfig, SageModel, accuracy, disjoint_union

__all__ = [
    "BenchError",
    "NodeSplitParams",
    "TrialConfig",
    "TrialResult",
    "GridSpec",
    "ResultsTable",
    "run_node_trial",
    "run_graph_trial",
    "grid_search",
    "aggregate",
    "emit_table",
    "make_key",
    "manifest_entries",
    "write_manifest",
]

# Feature kinds whose matrices do not depend on the per-run seed.
_SEED_INVARIANT_KINDS = frozenset(
    {"one_hot", "shared", "degree", "degree_plus", "pagerank", "eigen", "real"}
)

_FEATURE_ORDER = (
    "random", "one_hot", "eigen", "deepwalk",
    "shared", "degree", "degree_plus", "pagerank", "real",
)
_DISPLAY_NAMES = {"one_hot": "one-hot", "degree_plus": "degree+", "real": "real feat."}
_TYPE_SYMBOLS = {"positional": "P", "structural": "S", "real": "real"}


class BenchError(RuntimeError):
    """A trial stage failed; the message names the stage."""


@dataclass(frozen=True)
class NodeSplitParams:
    """How to split a node dataset: fixed count per class, or a fraction."""

    kind: str = "per_class"
    per_class: int = 20
    val_size: int = 500
    train_frac: float = 0.8
    val_frac: float = 0.1

    def __post_init__(self):
        if self.kind not in ("per_class", "fraction"):
            raise ValueError("split kind must be 'per_class' or 'fraction'")


@dataclass(frozen=True)
class TrialConfig:
    dataset: str
    feature: FeatureSpec
    model: ModelConfig
    split: NodeSplitParams = field(default_factory=NodeSplitParams)
    seeds: tuple = (0, 1, 2, 3, 4)
    folds: int = 10
    tu_name: str | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")


@dataclass(frozen=True)
class TrialResult:
    """Per-run accuracies (percent) and their aggregate statistics."""

    accuracies: tuple
    val_accuracies: tuple
    best_epochs: tuple
    mean: float
    std: float
    wall_time: float

    @classmethod
    def from_runs(cls, accs, vals, epochs, wall_time) -> "TrialResult":
        arr = np.asarray(accs, dtype=np.float64)
        return cls(
            accuracies=tuple(float(a) for a in accs),
            val_accuracies=tuple(float(v) for v in vals),
            best_epochs=tuple(int(e) for e in epochs),
            mean=float(arr.mean()),
            std=float(arr.std()),  # population std, matching the +/- format
            wall_time=float(wall_time),
        )

    @property
    def mean_val_accuracy(self) -> float:
        return float(np.mean(self.val_accuracies))

    def cell(self) -> str:
        return f"{self.mean:.1f}±{self.std:.1f}"


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except TrainingDivergedError:
        raise
    except BenchError:
        raise
    except Exception as exc:
        raise BenchError(f"trial stage '{name}' failed: {exc}") from exc


def _make_split(labels, params: NodeSplitParams, rng: Rng) -> SplitSpec:
    if params.kind == "per_class":
        return split_per_class(labels, params.per_class, params.val_size, rng)
    return split_fraction(labels, params.train_frac, rng, val_frac=params.val_frac)


def _node_features(ds: NodeDataset, spec: FeatureSpec, rng: Rng):
    if spec.kind == "real":
        if ds.real_features is None:
            raise BenchError(f"dataset {ds.name} has no real features")
        return ds.real_features
    return build_features(ds.graph, spec, rng)


def _train_eval_nodes(graph, X, labels, split, mcfg: ModelConfig, root: Rng):
    """Train one model; return (test_acc, val_acc, best_epoch) at selection."""
    model = SageModel(X.dim, labels.num_classes, mcfg, root.split("init"))
    opt = Adam(model.parameters(), mcfg.learning_rate)
    train_rng = root.split("train")
    best = (-1.0, 0, 0.0)  # (val_acc, epoch, test_acc)
    for epoch in range(1, mcfg.epochs + 1):
        logits = model.forward_nodes(graph, X, train_rng.split(f"epoch:{epoch}"), training=True)
        loss = cross_entropy(logits, labels.labels, split.train)
        if not np.isfinite(loss.values):
            raise TrainingDivergedError("training loss became non-finite")
        opt.zero_grad()
        loss.backward()
        opt.step()
        eval_logits = model.forward_nodes(graph, X).values
        test_acc = accuracy(eval_logits, labels.labels, split.test)
        if split.val.size:
            val_acc = accuracy(eval_logits, labels.labels, split.val)
            if val_acc > best[0]:
                best = (val_acc, epoch, test_acc)
        else:
            # No validation pool configured: keep the final epoch.
            best = (test_acc, epoch, test_acc)
    return best[2], best[0], best[1]


def run_node_trial(cfg: TrialConfig, dataset: NodeDataset | None = None) -> TrialResult:
    """One node-classification trial, averaged over the config's seeds."""
    t0 = time.perf_counter()
    ds = dataset or _stage("load", load_node_dataset, cfg.dataset)
    cached_features = None
    accs, vals, epochs = [], [], []
    for seed in cfg.seeds:
        root = Rng(seed)
        split = _stage("split", _make_split, ds.labels, cfg.split, root.split("split"))
        if cfg.feature.kind in _SEED_INVARIANT_KINDS:
            if cached_features is None:
                cached_features = _stage(
                    "features", _node_features, ds, cfg.feature, root.split("features")
                )
            X = cached_features
        else:
            X = _stage("features", _node_features, ds, cfg.feature, root.split("features"))
        test_acc, val_acc, best_epoch = _stage(
            "train", _train_eval_nodes, ds.graph, X, ds.labels, split, cfg.model, root
        )
        accs.append(test_acc)
        vals.append(val_acc)
        epochs.append(best_epoch)
    return TrialResult.from_runs(accs, vals, epochs, time.perf_counter() - t0)


def _collection_features(coll: GraphCollection, spec: FeatureSpec, rng: Rng):
    mats = build_collection_features(coll, spec, rng)
    return np.vstack([m.values for m in mats])


def _carve_fold_val(train_ids, labels, frac, rng: Rng):
    """Stratified validation holdout from a training fold."""
    train_ids = np.asarray(train_ids)
    by_class = {}
    for gid in train_ids:
        by_class.setdefault(int(labels[gid]), []).append(int(gid))
    val = []
    for c in sorted(by_class):
        ids = np.asarray(by_class[c])
        take = max(1, int(round(frac * ids.size)))
        perm = rng.split(f"class:{c}").permutation(ids.size)
        val.extend(ids[perm[:take]].tolist())
    val = np.sort(np.asarray(val, dtype=np.int64))
    kept = np.setdiff1d(train_ids, val, assume_unique=True)
    return kept, val


def _train_eval_graphs(union, sizes, X, labels, train_ids, val_ids, test_ids,
                       num_classes, mcfg: ModelConfig, root: Rng):
    model = SageModel(X.shape[1], num_classes, mcfg, root.split("init"))
    opt = Adam(model.parameters(), mcfg.learning_rate)
    train_rng = root.split("train")
    best = (-1.0, 0, 0.0)
    for epoch in range(1, mcfg.epochs + 1):
        logits = model.forward_graph_batch(
            union, sizes, X, train_rng.split(f"epoch:{epoch}"), training=True
        )
        loss = cross_entropy(logits, labels, train_ids)
        if not np.isfinite(loss.values):
            raise TrainingDivergedError("training loss became non-finite")
        opt.zero_grad()
        loss.backward()
        opt.step()
        eval_logits = model.forward_graph_batch(union, sizes, X).values
        val_acc = accuracy(eval_logits, labels, val_ids)
        test_acc = accuracy(eval_logits, labels, test_ids)
        if val_acc > best[0]:
            best = (val_acc, epoch, test_acc)
    return best[2], best[0], best[1]


def run_graph_trial(cfg: TrialConfig, collection: GraphCollection | None = None) -> TrialResult:
    """One graph-classification trial: stratified k-fold per seed."""
    t0 = time.perf_counter()
    if collection is None:
        name = cfg.tu_name or cfg.dataset.rstrip("/").rsplit("/", 1)[-1]
        collection = _stage("load", load_tudataset, cfg.dataset, name)
    union, sizes = disjoint_union(collection.graphs)
    labels = collection.graph_labels
    num_classes = collection.num_classes
    cached_X = None
    accs, vals, epochs = [], [], []
    for seed in cfg.seeds:
        root = Rng(seed)
        if cfg.feature.kind in _SEED_INVARIANT_KINDS:
            if cached_X is None:
                cached_X = _stage(
                    "features", _collection_features, collection, cfg.feature,
                    root.split("features"),
                )
            X = cached_X
        else:
            X = _stage(
                "features", _collection_features, collection, cfg.feature,
                root.split("features"),
            )
        folds = _stage("split", stratified_kfold, labels, cfg.folds, root.split("folds"))
        for fold_i, fold in enumerate(folds):
            kept, val_ids = _carve_fold_val(
                fold.train, labels, 0.1, root.split(f"val:{fold_i}")
            )
            test_acc, val_acc, best_epoch = _stage(
                "train", _train_eval_graphs, union, sizes, X, labels,
                kept, val_ids, fold.test, num_classes, cfg.model,
                root.split(f"fold:{fold_i}"),
            )
            accs.append(test_acc)
            vals.append(val_acc)
            epochs.append(best_epoch)
    return TrialResult.from_runs(accs, vals, epochs, time.perf_counter() - t0)


def run_trial(cfg: TrialConfig, data=None) -> TrialResult:
    """Dispatch on the model's readout: none = node task, else graph task."""
    if cfg.model.readout == "none":
        return run_node_trial(cfg, data)
    return run_graph_trial(cfg, data)


@dataclass(frozen=True)
class GridSpec:
    """Exhaustive hyper-parameter axes, expanded in declaration order."""

    learning_rates: tuple = (0.01,)
    epoch_budgets: tuple = (100,)
    sample_sizes: tuple = (0,)
    feature_dims: tuple = (100, 200, 300, 400, 500)
    eigen_ks: tuple = (100,)
    depths: tuple = (2,)

    def __post_init__(self):
        for name in ("learning_rates", "epoch_budgets", "sample_sizes",
                     "feature_dims", "eigen_ks", "depths"):
            if not getattr(self, name):
                raise ValueError(f"grid axis {name} must be non-empty")


def _grid_points(grid: GridSpec, base: TrialConfig):
    kind = base.feature.kind
    dims = grid.feature_dims if kind in ("random", "shared", "pagerank", "deepwalk") else (None,)
    ks = grid.eigen_ks if kind == "eigen" else (None,)
    for lr, ep, ss, dim, k, depth in itertools.product(
        grid.learning_rates, grid.epoch_budgets, grid.sample_sizes, dims, ks, grid.depths
    ):
        feature = base.feature
        if dim is not None:
            feature = replace(feature, dim=dim)
        if k is not None:
            feature = replace(feature, k=k)
        model = replace(
            base.model, learning_rate=lr, epochs=ep, sample_size=ss, num_layers=depth
        )
        yield replace(base, feature=feature, model=model)


def grid_search(grid: GridSpec, base: TrialConfig, data=None):
    """Evaluate every grid point; select by mean validation accuracy.

    Returns ``(best_config, scored)`` where ``scored`` is a list of
    ``(config, mean_val_accuracy)`` in evaluation order.  Diverging points
    score ``-inf`` and are never selected while any point succeeds.
    """
    scored = []
    best_cfg, best_score = None, -np.inf
    for cfg in _grid_points(grid, base):
        try:
            result = run_trial(cfg, data)
            score = result.mean_val_accuracy
        except (TrainingDivergedError, BenchError):
            score = -np.inf
        scored.append((cfg, score))
        if score > best_score:
            best_cfg, best_score = cfg, score
    if best_cfg is None:
        raise BenchError("every grid point failed")
    return best_cfg, scored


def make_key(aggregator: str, feature_kind: str, dataset: str) -> tuple:
    """(aggregator, type symbol, feature display name, dataset) table key."""
    symbol = _TYPE_SYMBOLS[feature_type(feature_kind)]
    return (aggregator, symbol, _DISPLAY_NAMES.get(feature_kind, feature_kind), dataset)


@dataclass
class ResultsTable:
    rows: dict = field(default_factory=dict)

    def add(self, key: tuple, result: TrialResult) -> None:
        if key in self.rows:
            raise ValueError(f"duplicate results key {key!r}")
        self.rows[key] = result

    def datasets(self) -> list:
        seen = []
        for key in self.rows:
            if key[3] not in seen:
                seen.append(key[3])
        return seen


def aggregate(results) -> ResultsTable:
    """Assemble (key, TrialResult) pairs, rejecting duplicate keys."""
    table = ResultsTable()
    for key, result in results:
        table.add(key, result)
    return table


def _row_sort_key(row_id: tuple):
    aggr, symbol, feature, _ = row_id
    aggr_rank = {"mean": 0, "sum": 1}.get(aggr, 2)
    type_rank = {"P": 0, "S": 1, "real": 2}.get(symbol, 3)
    display = [_DISPLAY_NAMES.get(k, k) for k in _FEATURE_ORDER]
    feat_rank = display.index(feature) if feature in display else len(display)
    return (aggr_rank, type_rank, feat_rank)


def emit_table(table: ResultsTable, fmt: str = "markdown") -> str:
    """Render the table with one column per dataset, rows in stable order."""
    if fmt not in ("csv", "markdown"):
        raise ValueError("format must be 'csv' or 'markdown'")
    datasets = table.datasets()
    row_ids = sorted(
        {(k[0], k[1], k[2]) for k in table.rows}, key=lambda r: _row_sort_key((*r, ""))
    )
    header = ["Aggr.", "Type", "Feature"] + list(datasets)
    body = []
    for aggr, symbol, feature in row_ids:
        cells = []
        for ds in datasets:
            result = table.rows.get((aggr, symbol, feature, ds))
            cells.append(result.cell() if result is not None else "-")
        body.append([aggr, symbol, feature] + cells)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()
    widths = [max(len(str(r[i])) for r in [header] + body) for i in range(len(header))]
    def fmt_row(row):
        return "| " + " | ".join(str(c).ljust(w) for c, w in zip(row, widths)) + " |"
    lines = [fmt_row(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines.extend(fmt_row(r) for r in body)
    return "\n".join(lines) + "\n"


def manifest_entries(cfg: TrialConfig, extra: dict | None = None) -> dict:
    """Flatten a trial's full effective configuration into string pairs."""
    entries = {
        "dataset": cfg.dataset,
        "seeds": ",".join(str(s) for s in cfg.seeds),
        "folds": str(cfg.folds),
        "feature.kind": cfg.feature.kind,
        "feature.seed": str(cfg.feature.seed),
        "feature.bucket_base": str(cfg.feature.bucket_base),
        "model.num_layers": str(cfg.model.num_layers),
        "model.hidden_dim": str(cfg.model.hidden_dim),
        "model.aggregator": cfg.model.aggregator,
        "model.readout": cfg.model.readout,
        "model.sample_size": str(cfg.model.sample_size),
        "model.learning_rate": repr(cfg.model.learning_rate),
        "model.epochs": str(cfg.model.epochs),
        "model.dropout": repr(cfg.model.dropout),
        "split.kind": cfg.split.kind,
        "split.per_class": str(cfg.split.per_class),
        "split.val_size": str(cfg.split.val_size),
        "split.train_frac": repr(cfg.split.train_frac),
        "split.val_frac": repr(cfg.split.val_frac),
        "numerics.eigen_tol": "1e-06",
        "numerics.pagerank_damping": "0.85",
        "numerics.pagerank_tol": "1e-10",
    }
    if cfg.feature.dim is not None:
        entries["feature.dim"] = str(cfg.feature.dim)
    if cfg.feature.k is not None:
        entries["feature.k"] = str(cfg.feature.k)
    if cfg.feature.degree_cap is not None:
        entries["feature.degree_cap"] = str(cfg.feature.degree_cap)
    walk = cfg.feature.walk
    if walk is not None:
        entries.update({
            "walk.walk_len": str(walk.walk_len),
            "walk.walks_per_node": str(walk.walks_per_node),
            "walk.window": str(walk.window),
            "walk.negatives": str(walk.negatives),
            "walk.epochs": str(walk.epochs),
            "walk.learning_rate": repr(walk.learning_rate),
            "walk.batch_size": str(walk.batch_size),
        })
    if cfg.tu_name:
        entries["tu_name"] = cfg.tu_name
    if extra:
        entries.update(extra)
    return entries


def write_manifest(path, entries: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(entries):
            fh.write(f"{key} = {entries[key]}\n")
