"""Command-line interface.

Subcommands: ``inspect`` (dataset statistics), ``features`` (write one
feature matrix as TSV), ``train-node`` / ``train-graph`` (single trials),
``grid`` (exhaustive hyper-parameter search), and ``reproduce`` (emit one of
the three benchmark tables).  A config file of ``key = value`` lines can
substitute any flag; explicit flags win.  Every artifact-producing run
writes a manifest that can be replayed via ``--config``.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench, synth
from .datasets import (
    load_node_dataset,
    load_tudataset,
    save_node_dataset,
    save_tudataset,
)
from .deepwalk import WalkParams
from .features import FEATURE_KINDS, FeatureSpec, build_features, save_features
from .rng import Rng
from .sage import ModelConfig

__all__ = ["main", "run"]

_KIND_ALIASES = {"one-hot": "one_hot", "degree-plus": "degree_plus"}

_TABLE_NODE_DATASETS = {
    "table1": ("cora", "pubmed", "citeseer"),
    "table2": ("usa-air", "brazil-air", "europe-air"),
}
_TABLE3_DATASETS = ("MUTAG", "PROTEINS", "IMDB-BINARY", "IMDB-MULTI")
_TABLE_FEATURES = {
    "table1": ("random", "one_hot", "eigen", "deepwalk", "shared", "degree", "pagerank"),
    "table2": ("random", "one_hot", "eigen", "deepwalk", "shared", "degree",
               "degree_plus", "pagerank"),
    "table3": ("random", "one_hot", "eigen", "deepwalk", "shared", "degree", "pagerank"),
}


class CliError(RuntimeError):
    """Runtime failure surfaced as a one-line diagnostic (exit 1)."""


def _normalize_kind(kind: str) -> str:
    kind = _KIND_ALIASES.get(kind, kind)
    if kind not in FEATURE_KINDS:
        raise CliError(f"unknown feature kind {kind!r}")
    return kind


def _read_config(path) -> dict:
    entries = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                entries[key.strip()] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    return entries


_CONFIG_COERCERS = {
    "dim": int, "k": int, "bucket_base": int, "degree_cap": int,
    "seed": int, "epochs": int, "sample_size": int, "folds": int,
    "hidden_dim": int, "num_layers": int, "per_class": int, "val_size": int,
    "walk_len": int, "walks_per_node": int, "window": int, "negatives": int,
    "dw_epochs": int, "dw_batch": int,
    "lr": float, "dropout": float, "train_frac": float, "val_frac": float,
    "dw_lr": float,
    "synth": lambda v: v.lower() in ("1", "true", "yes"),
    "seeds": lambda v: v,
}


def _apply_config(subparser: argparse.ArgumentParser, config_path) -> None:
    """Install config-file values as defaults on a subcommand parser.

    Explicit command-line flags still win because defaults only fill in
    flags that were not given.  Keys prefixed ``info.`` (informational
    manifest entries) are skipped; other unknown keys draw a warning.
    """
    entries = _read_config(config_path)
    known = {a.dest for a in subparser._actions}
    defaults = {}
    for key, value in entries.items():
        if key.startswith("info.") or key == "command":
            continue
        dest = key.replace("-", "_")
        if dest not in known:
            print(f"warning: ignoring unknown config key {key!r}", file=sys.stderr)
            continue
        coerce = _CONFIG_COERCERS.get(dest, str)
        defaults[dest] = coerce(value)
    subparser.set_defaults(**defaults)


def _parse_seeds(text: str) -> tuple:
    try:
        return tuple(int(s) for s in str(text).split(",") if s != "")
    except ValueError as exc:
        raise CliError(f"bad seeds list {text!r}") from exc


def _walk_params(ns) -> WalkParams:
    return WalkParams(
        walk_len=ns.walk_len,
        walks_per_node=ns.walks_per_node,
        window=ns.window,
        negatives=ns.negatives,
        epochs=ns.dw_epochs,
        learning_rate=ns.dw_lr,
        batch_size=ns.dw_batch,
    )


def _feature_spec(ns, kind: str) -> FeatureSpec:
    kind = _normalize_kind(kind)
    kwargs = {"kind": kind, "seed": ns.seed}
    if kind in ("random", "shared", "pagerank", "deepwalk"):
        kwargs["dim"] = ns.dim
    if kind == "eigen":
        kwargs["k"] = ns.k
    if kind == "degree_plus":
        kwargs["bucket_base"] = ns.bucket_base
    if kind == "degree" and ns.degree_cap is not None:
        kwargs["degree_cap"] = ns.degree_cap
    if kind == "deepwalk":
        kwargs["walk"] = _walk_params(ns)
    try:
        return FeatureSpec(**kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _model_config(ns, readout: str) -> ModelConfig:
    return ModelConfig(
        num_layers=ns.num_layers,
        hidden_dim=ns.hidden_dim,
        aggregator=ns.aggr,
        readout=readout,
        sample_size=ns.sample_size,
        learning_rate=ns.lr,
        epochs=ns.epochs,
        dropout=ns.dropout,
    )


def _split_params(ns) -> bench.NodeSplitParams:
    return bench.NodeSplitParams(
        kind=ns.split,
        per_class=ns.per_class,
        val_size=ns.val_size,
        train_frac=ns.train_frac,
        val_frac=ns.val_frac,
    )


def _flag_manifest(ns, command: str) -> dict:
    skip = {"config", "func", "command"}
    entries = {"command": command}
    for key, value in sorted(vars(ns).items()):
        if key in skip or callable(value) or value is None:
            continue
        entries[key] = str(value)
    entries["info.numerics.eigen_tol"] = "1e-06"
    entries["info.numerics.pagerank_damping"] = "0.85"
    entries["info.numerics.pagerank_tol"] = "1e-10"
    return entries


def _write_outputs(out_dir, table_text: str, fmt: str, manifest: dict) -> str:
    os.makedirs(out_dir, exist_ok=True)
    ext = "csv" if fmt == "csv" else "md"
    table_path = os.path.join(out_dir, f"results.{ext}")
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(table_text)
    bench.write_manifest(os.path.join(out_dir, "manifest.txt"), manifest)
    return table_path


def _load_any_dataset(ns):
    if getattr(ns, "tu", None):
        return load_tudataset(ns.dataset, ns.tu)
    return load_node_dataset(ns.dataset)


def _cmd_inspect(ns) -> int:
    data = _load_any_dataset(ns)
    if hasattr(data, "graphs"):
        sizes = np.array([g.num_nodes for g in data.graphs])
        print(f"graphs: {data.num_graphs}")
        print(f"classes: {data.num_classes}")
        print(f"nodes: min {sizes.min()} / mean {sizes.mean():.1f} / max {sizes.max()}")
        print(f"max degree: {data.global_max_degree}")
        print(f"node features: {'yes' if data.node_features is not None else 'no'}")
    else:
        g = data.graph
        counts = data.labels.class_counts()
        print(f"nodes: {g.num_nodes}")
        print(f"edges: {g.num_edges}")
        print(f"classes: {data.labels.num_classes} (counts {counts.tolist()})")
        print(f"max degree: {g.max_degree}")
        print(f"real features: "
              f"{data.real_features.dim if data.real_features is not None else 'none'}")
    return 0


def _cmd_features(ns) -> int:
    ds = load_node_dataset(ns.dataset)
    kind = _normalize_kind(ns.kind)
    if kind == "real":
        if ds.real_features is None:
            raise CliError(f"dataset {ds.name} has no real features")
        fm = ds.real_features
    else:
        spec = _feature_spec(ns, kind)
        fm = build_features(ds.graph, spec, Rng(ns.seed))
    save_features(ns.out, fm)
    bench.write_manifest(ns.out + ".manifest.txt", _flag_manifest(ns, "features"))
    print(f"wrote {fm.num_nodes}x{fm.dim} {kind} features to {ns.out}")
    return 0


def _trial_config(ns, readout: str) -> bench.TrialConfig:
    return bench.TrialConfig(
        dataset=ns.dataset,
        feature=_feature_spec(ns, ns.kind),
        model=_model_config(ns, readout),
        split=_split_params(ns),
        seeds=_parse_seeds(ns.seeds),
        folds=ns.folds,
        tu_name=getattr(ns, "tu", None),
    )


def _cmd_train_node(ns) -> int:
    cfg = _trial_config(ns, readout="none")
    result = bench.run_node_trial(cfg)
    key = bench.make_key(ns.aggr, _normalize_kind(ns.kind), _dataset_label(ns.dataset))
    table = bench.aggregate([(key, result)])
    path = _write_outputs(ns.out, bench.emit_table(table, ns.format), ns.format,
                          _flag_manifest(ns, "train-node"))
    print(f"{key[2]} / {ns.aggr}: {result.cell()}  -> {path}")
    return 0


def _cmd_train_graph(ns) -> int:
    cfg = _trial_config(ns, readout=ns.readout)
    result = bench.run_graph_trial(cfg)
    key = bench.make_key(ns.aggr, _normalize_kind(ns.kind), _dataset_label(ns.dataset))
    table = bench.aggregate([(key, result)])
    path = _write_outputs(ns.out, bench.emit_table(table, ns.format), ns.format,
                          _flag_manifest(ns, "train-graph"))
    print(f"{key[2]} / {ns.aggr}/{ns.readout}: {result.cell()}  -> {path}")
    return 0


def _comma_list(coerce):
    def parse(text):
        return tuple(coerce(t) for t in text.split(",") if t != "")
    return parse


def _cmd_grid(ns) -> int:
    readout = ns.readout if ns.readout != "none" else "none"
    base = _trial_config(ns, readout=readout)
    grid = bench.GridSpec(
        learning_rates=ns.grid_lr,
        epoch_budgets=ns.grid_epochs,
        sample_sizes=ns.grid_sample_sizes,
        feature_dims=ns.grid_dims,
        eigen_ks=ns.grid_ks,
        depths=ns.grid_depths,
    )
    best, scored = bench.grid_search(grid, base)
    os.makedirs(ns.out, exist_ok=True)
    scores_path = os.path.join(ns.out, "grid_scores.tsv")
    with open(scores_path, "w", encoding="utf-8") as fh:
        fh.write("lr\tepochs\tsample_size\tdim\tk\tdepth\tval_acc\n")
        for cfg, score in scored:
            fh.write(
                f"{cfg.model.learning_rate}\t{cfg.model.epochs}\t"
                f"{cfg.model.sample_size}\t{cfg.feature.dim}\t{cfg.feature.k}\t"
                f"{cfg.model.num_layers}\t{score:.4f}\n"
            )
    manifest = _flag_manifest(ns, "grid")
    manifest["best.lr"] = repr(best.model.learning_rate)
    manifest["best.epochs"] = str(best.model.epochs)
    manifest["best.sample_size"] = str(best.model.sample_size)
    manifest["best.num_layers"] = str(best.model.num_layers)
    if best.feature.dim is not None:
        manifest["best.dim"] = str(best.feature.dim)
    if best.feature.k is not None:
        manifest["best.k"] = str(best.feature.k)
    bench.write_manifest(os.path.join(ns.out, "manifest.txt"), manifest)
    best_score = max(score for _, score in scored)
    print(f"grid: {len(scored)} points, best val acc {best_score:.2f} -> {scores_path}")
    return 0


def _dataset_label(path: str) -> str:
    return os.path.basename(os.path.normpath(path))


def _ensure_synth_data(table: str, root: str) -> None:
    os.makedirs(root, exist_ok=True)
    if table in _TABLE_NODE_DATASETS:
        for name in _TABLE_NODE_DATASETS[table]:
            target = os.path.join(root, name)
            if not os.path.isdir(target):
                save_node_dataset(synth.make_desk_node_dataset(name), target)
    else:
        for name in _TABLE3_DATASETS:
            target = os.path.join(root, name)
            if not os.path.isdir(target):
                save_tudataset(synth.make_desk_collection(name), target, name)


def _cmd_reproduce(ns) -> int:
    table_id = ns.table
    if ns.synth:
        _ensure_synth_data(table_id, ns.data_root)
    seeds = _parse_seeds(ns.seeds)
    pairs = []
    if table_id in _TABLE_NODE_DATASETS:
        split = bench.NodeSplitParams(
            kind="per_class" if table_id == "table1" else "fraction",
            per_class=ns.per_class, val_size=ns.val_size,
            train_frac=ns.train_frac, val_frac=ns.val_frac,
        )
        for name in _TABLE_NODE_DATASETS[table_id]:
            directory = os.path.join(ns.data_root, name)
            if not os.path.isdir(directory):
                raise CliError(f"dataset directory {directory} not found "
                               f"(use --synth for generated stand-ins)")
            ds = load_node_dataset(directory)
            kinds = list(_TABLE_FEATURES[table_id])
            if table_id == "table1" and ds.real_features is not None:
                kinds.append("real")
            for aggr in ("mean", "sum"):
                for kind in kinds:
                    ns.kind = kind
                    ns.aggr = aggr
                    cfg = bench.TrialConfig(
                        dataset=directory,
                        feature=_feature_spec(ns, kind),
                        model=_model_config(ns, "none"),
                        split=split,
                        seeds=seeds,
                    )
                    result = bench.run_node_trial(cfg, ds)
                    pairs.append((bench.make_key(aggr, kind, name), result))
                    print(f"{name} {aggr} {kind}: {result.cell()}", file=sys.stderr)
    else:
        for name in _TABLE3_DATASETS:
            directory = os.path.join(ns.data_root, name)
            if not os.path.isdir(directory):
                raise CliError(f"dataset directory {directory} not found "
                               f"(use --synth for generated stand-ins)")
            coll = load_tudataset(directory, name)
            kinds = list(_TABLE_FEATURES[table_id])
            if coll.node_features is not None:
                kinds.append("real")
            for aggr in ("mean", "sum"):
                for kind in kinds:
                    ns.kind = kind
                    ns.aggr = aggr
                    cfg = bench.TrialConfig(
                        dataset=directory,
                        feature=_feature_spec(ns, kind),
                        model=_model_config(ns, readout=aggr),
                        seeds=seeds,
                        folds=ns.folds,
                        tu_name=name,
                    )
                    result = bench.run_graph_trial(cfg, coll)
                    pairs.append((bench.make_key(aggr, kind, name), result))
                    print(f"{name} {aggr} {kind}: {result.cell()}", file=sys.stderr)
    table = bench.aggregate(pairs)
    path = _write_outputs(ns.out, bench.emit_table(table, ns.format), ns.format,
                          _flag_manifest(ns, f"reproduce-{table_id}"))
    print(f"wrote {path}")
    return 0


def _add_common_flags(p: argparse.ArgumentParser, *, model: bool = False) -> None:
    p.add_argument("--config", help="config file of 'key = value' lines")
    p.add_argument("--kind", default="degree",
                   help="feature kind (random, one-hot, eigen, deepwalk, shared, "
                        "degree, degree-plus, pagerank, real)")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--k", type=int, default=32)
    p.add_argument("--bucket-base", dest="bucket_base", type=int, default=2)
    p.add_argument("--degree-cap", dest="degree_cap", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--walk-len", dest="walk_len", type=int, default=40)
    p.add_argument("--walks-per-node", dest="walks_per_node", type=int, default=10)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--dw-epochs", dest="dw_epochs", type=int, default=5)
    p.add_argument("--dw-lr", dest="dw_lr", type=float, default=0.025)
    p.add_argument("--dw-batch", dest="dw_batch", type=int, default=4096)
    if model:
        p.add_argument("--aggr", choices=("mean", "sum"), default="mean")
        p.add_argument("--lr", type=float, default=0.01)
        p.add_argument("--epochs", type=int, default=200)
        p.add_argument("--sample-size", dest="sample_size", type=int, default=0)
        p.add_argument("--hidden-dim", dest="hidden_dim", type=int, default=64)
        p.add_argument("--num-layers", dest="num_layers", type=int, default=2)
        p.add_argument("--dropout", type=float, default=0.0)
        p.add_argument("--seeds", default="0,1,2,3,4")
        p.add_argument("--folds", type=int, default=10)
        p.add_argument("--split", choices=("per_class", "fraction"), default="per_class")
        p.add_argument("--per-class", dest="per_class", type=int, default=20)
        p.add_argument("--val-size", dest="val_size", type=int, default=500)
        p.add_argument("--train-frac", dest="train_frac", type=float, default=0.8)
        p.add_argument("--val-frac", dest="val_frac", type=float, default=0.1)
        p.add_argument("--format", choices=("csv", "markdown"), default="markdown")


def build_parser():
    """Returns ``(parser, subparser_map)``; the map enables config replay."""
    parser = argparse.ArgumentParser(
        prog="nodefeat",
        description="Artificial node features and GraphSAGE benchmarks "
                    "for non-attributed graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    p = subparsers["inspect"] = sub.add_parser("inspect", help="print dataset statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--tu", help="TU dataset name (graph collections)")
    p.add_argument("--config", help="config file of 'key = value' lines")
    p.set_defaults(func=_cmd_inspect)

    p = subparsers["features"] = sub.add_parser("features", help="build one feature matrix as TSV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    _add_common_flags(p)
    p.set_defaults(func=_cmd_features)

    p = subparsers["train-node"] = sub.add_parser("train-node", help="run one node-classification trial")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default="run-node")
    _add_common_flags(p, model=True)
    p.set_defaults(func=_cmd_train_node)

    p = subparsers["train-graph"] = sub.add_parser("train-graph", help="run one graph-classification trial")
    p.add_argument("--dataset", required=True)
    p.add_argument("--tu", help="TU dataset name (defaults to directory name)")
    p.add_argument("--out", default="run-graph")
    p.add_argument("--readout", choices=("mean", "sum"), default="mean")
    _add_common_flags(p, model=True)
    p.set_defaults(func=_cmd_train_graph)

    p = subparsers["grid"] = sub.add_parser("grid", help="exhaustive hyper-parameter search")
    p.add_argument("--dataset", required=True)
    p.add_argument("--tu", help="TU dataset name (switches to the graph task)")
    p.add_argument("--out", default="run-grid")
    p.add_argument("--readout", choices=("mean", "sum", "none"), default="none")
    p.add_argument("--grid-lr", type=_comma_list(float), default=(0.01,))
    p.add_argument("--grid-epochs", type=_comma_list(int), default=(100,))
    p.add_argument("--grid-sample-sizes", type=_comma_list(int), default=(0,))
    p.add_argument("--grid-dims", type=_comma_list(int), default=(100, 200, 300, 400, 500))
    p.add_argument("--grid-ks", type=_comma_list(int), default=(32,))
    p.add_argument("--grid-depths", type=_comma_list(int), default=(2,))
    _add_common_flags(p, model=True)
    p.set_defaults(func=_cmd_grid)

    p = subparsers["reproduce"] = sub.add_parser("reproduce", help="emit one full benchmark table")
    p.add_argument("table", choices=("table1", "table2", "table3"))
    p.add_argument("--data-root", dest="data_root", required=True)
    p.add_argument("--out", default="run-reproduce")
    p.add_argument("--synth", action="store_true",
                   help="generate desk-scale stand-in datasets if missing")
    _add_common_flags(p, model=True)
    p.set_defaults(func=_cmd_reproduce)
    return parser, subparsers


def run(argv) -> int:
    parser, subparsers = build_parser()
    ns = parser.parse_args(argv)
    try:
        if getattr(ns, "config", None):
            _apply_config(subparsers[ns.command], ns.config)
            ns = parser.parse_args(argv)
        return ns.func(ns)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures -> exit 1 with one line
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
