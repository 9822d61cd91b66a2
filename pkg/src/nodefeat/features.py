"""Construction of artificial node-feature matrices.

Two families are implemented.  Positional features encode where a node sits
in the global graph (``random``, ``one_hot``, ``eigen``, ``deepwalk``);
structural features encode its local connectivity role (``shared``,
``degree``, ``degree_plus``, ``pagerank``).  ``real`` passes through features
loaded from disk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import deepwalk as dw
from .graph import Graph, GraphCollection, normalized_adjacency
from .numerics import pagerank, top_k_eigs
from .rng import Rng

__all__ = [
    "POSITIONAL_KINDS",
    "STRUCTURAL_KINDS",
    "FEATURE_KINDS",
    "FeatureSpec",
    "FeatureMatrix",
    "FeatureFileError",
    "init_random",
    "init_one_hot",
    "init_shared",
    "init_degree",
    "init_degree_plus",
    "init_pagerank",
    "init_eigen",
    "init_deepwalk",
    "load_real_features",
    "save_features",
    "build_features",
    "build_collection_features",
]

POSITIONAL_KINDS = ("random", "one_hot", "eigen", "deepwalk")
STRUCTURAL_KINDS = ("shared", "degree", "degree_plus", "pagerank")
FEATURE_KINDS = POSITIONAL_KINDS + STRUCTURAL_KINDS + ("real",)

# Eigensolver settings used when building eigen features.
_EIGEN_TOL = 1e-6
_EIGEN_MAX_ITER = 20000


class FeatureFileError(ValueError):
    """Raised for malformed or inconsistent feature files."""


def feature_type(kind: str) -> str:
    if kind in POSITIONAL_KINDS:
        return "positional"
    if kind in STRUCTURAL_KINDS:
        return "structural"
    if kind == "real":
        return "real"
    raise ValueError(f"unknown feature kind {kind!r}")


@dataclass(frozen=True)
class FeatureSpec:
    """Declarative recipe for one feature matrix.

    Only the parameters relevant to ``kind`` may be set: ``dim`` for
    random/shared/pagerank/deepwalk, ``k`` for eigen, ``bucket_base`` for
    degree_plus, ``degree_cap`` for degree, ``walk`` for deepwalk.
    """

    kind: str
    dim: int | None = None
    k: int | None = None
    bucket_base: int = 2
    degree_cap: int | None = None
    walk: dw.WalkParams | None = None
    seed: int = 0
    path: str | None = None  # real features only

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        needs_dim = self.kind in ("random", "shared", "pagerank", "deepwalk")
        if needs_dim and (self.dim is None or self.dim < 1):
            raise ValueError(f"{self.kind} features require dim >= 1")
        if not needs_dim and self.dim is not None:
            raise ValueError(f"dim is not a parameter of {self.kind} features")
        if self.kind == "eigen":
            if self.k is None or self.k < 1:
                raise ValueError("eigen features require k >= 1")
        elif self.k is not None:
            raise ValueError(f"k is not a parameter of {self.kind} features")
        if self.kind == "degree_plus" and self.bucket_base < 2:
            raise ValueError("bucket_base must be >= 2")
        if self.degree_cap is not None and self.kind != "degree":
            raise ValueError("degree_cap only applies to degree features")
        if self.walk is not None and self.kind != "deepwalk":
            raise ValueError("walk parameters only apply to deepwalk features")
        if self.path is not None and self.kind != "real":
            raise ValueError("path only applies to real features")

    @property
    def type_tag(self) -> str:
        return feature_type(self.kind)


@dataclass(frozen=True)
class FeatureMatrix:
    """N-by-d node features plus the spec that produced them."""

    values: np.ndarray
    spec: FeatureSpec

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("feature values must be 2-D")
        if not np.isfinite(values).all():
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def num_nodes(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    @property
    def type_tag(self) -> str:
        return self.spec.type_tag


def init_random(g: Graph, dim: int, rng: Rng) -> FeatureMatrix:
    """Standard-normal vector per node; reseeded per training run upstream."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    values = rng.normal(g.num_nodes, dim)
    return FeatureMatrix(values, FeatureSpec("random", dim=dim, seed=rng.seed))


def init_one_hot(g: Graph, dim: int | None = None) -> FeatureMatrix:
    """Identity rows; ``dim`` widens the matrix for cross-graph alignment."""
    dim = g.num_nodes if dim is None else int(dim)
    if dim < g.num_nodes:
        raise ValueError("one-hot dim must cover all nodes")
    values = np.zeros((g.num_nodes, dim))
    values[np.arange(g.num_nodes), np.arange(g.num_nodes)] = 1.0
    return FeatureMatrix(values, FeatureSpec("one_hot"))


def init_shared(g: Graph, dim: int) -> FeatureMatrix:
    """The same all-ones vector for every node."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return FeatureMatrix(
        np.ones((g.num_nodes, dim)), FeatureSpec("shared", dim=dim)
    )


def init_degree(
    g: Graph, cap: int | None = None, max_degree: int | None = None
) -> FeatureMatrix:
    """One-hot of node degree; index and width clip at ``cap`` if given.

    ``max_degree`` overrides the graph's own maximum so feature widths agree
    across a graph collection.
    """
    top = g.max_degree if max_degree is None else int(max_degree)
    if cap is not None:
        top = min(top, int(cap))
    dim = top + 1
    idx = np.minimum(g.degrees, top)
    values = np.zeros((g.num_nodes, dim))
    values[np.arange(g.num_nodes), idx] = 1.0
    return FeatureMatrix(values, FeatureSpec("degree", degree_cap=cap))


def _int_log(value: int, base: int) -> int:
    """floor(log_base(value)) computed exactly on integers."""
    e = 0
    v = value
    while v >= base:
        v //= base
        e += 1
    return e


def degree_bucket(degree: int, base: int = 2) -> int:
    """Bucket 0 for isolated nodes, else floor(log_base(d)) + 1."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    return 0 if degree == 0 else _int_log(degree, base) + 1


def init_degree_plus(
    g: Graph, bucket_base: int = 2, max_degree: int | None = None
) -> FeatureMatrix:
    """One-hot over geometric degree buckets.

    Bucketing collapses the sparse, skewed tail of the degree distribution:
    degrees ``{1}, {base..base^2-1}, ...`` share a class, so rare large
    degrees still land on a well-trained embedding row.
    """
    if bucket_base < 2:
        raise ValueError("bucket_base must be >= 2")
    top = g.max_degree if max_degree is None else int(max_degree)
    dim = degree_bucket(top, bucket_base) + 1
    buckets = np.fromiter(
        (degree_bucket(int(d), bucket_base) for d in g.degrees),
        dtype=np.int64,
        count=g.num_nodes,
    )
    values = np.zeros((g.num_nodes, dim))
    values[np.arange(g.num_nodes), buckets] = 1.0
    return FeatureMatrix(values, FeatureSpec("degree_plus", bucket_base=bucket_base))


def init_pagerank(g: Graph, dim: int) -> FeatureMatrix:
    """PageRank score of each node tiled across ``dim`` columns."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    scores = pagerank(g)
    values = np.tile(scores[:, None], (1, dim))
    return FeatureMatrix(values, FeatureSpec("pagerank", dim=dim))


def init_eigen(g: Graph, k: int) -> FeatureMatrix:
    """Columns are the top-k eigenvectors of the normalized adjacency."""
    if not 1 <= k <= g.num_nodes:
        raise ValueError(f"k must satisfy 1 <= k <= {g.num_nodes}")
    _, vectors = top_k_eigs(
        normalized_adjacency(g), k, tol=_EIGEN_TOL, max_iter=_EIGEN_MAX_ITER
    )
    return FeatureMatrix(vectors, FeatureSpec("eigen", k=k))


def init_deepwalk(
    g: Graph, dim: int, walk_params: dw.WalkParams | None, rng: Rng
) -> FeatureMatrix:
    """Input embeddings of a skip-gram model trained on random walks."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    params = walk_params or dw.WalkParams()
    table = dw.deepwalk_embeddings(g, dim, params, rng)
    return FeatureMatrix(
        table.input_vectors,
        FeatureSpec("deepwalk", dim=dim, walk=params, seed=rng.seed),
    )


def load_real_features(path, g: Graph) -> FeatureMatrix:
    """Load a tab-separated float matrix with one row per node."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise FeatureFileError(
                    f"{path}:{lineno}: expected {width} columns, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise FeatureFileError(f"{path}:{lineno}: {exc}") from exc
    if len(rows) != g.num_nodes:
        raise FeatureFileError(
            f"{path}: {len(rows)} feature rows for a graph with {g.num_nodes} nodes"
        )
    values = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(values).all():
        raise FeatureFileError(f"{path}: non-finite feature value")
    return FeatureMatrix(values, FeatureSpec("real", path=str(path)))


def save_features(path, fm: FeatureMatrix) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in fm.values:
            fh.write("\t".join(repr(float(x)) for x in row) + "\n")


def build_features(
    g: Graph,
    spec: FeatureSpec,
    rng: Rng | None = None,
    *,
    max_degree: int | None = None,
    max_nodes: int | None = None,
) -> FeatureMatrix:
    """Dispatch a spec to its initializer.

    ``max_degree`` / ``max_nodes`` carry collection-wide maxima so degree and
    one-hot widths agree across graphs.
    """
    rng = rng or Rng(spec.seed)
    if spec.kind == "random":
        return init_random(g, spec.dim, rng)
    if spec.kind == "one_hot":
        return init_one_hot(g, dim=max_nodes)
    if spec.kind == "shared":
        return init_shared(g, spec.dim)
    if spec.kind == "degree":
        return init_degree(g, cap=spec.degree_cap, max_degree=max_degree)
    if spec.kind == "degree_plus":
        return init_degree_plus(g, spec.bucket_base, max_degree=max_degree)
    if spec.kind == "pagerank":
        return init_pagerank(g, spec.dim)
    if spec.kind == "eigen":
        return init_eigen(g, spec.k)
    if spec.kind == "deepwalk":
        return init_deepwalk(g, spec.dim, spec.walk, rng)
    if spec.kind == "real":
        if spec.path is None:
            raise ValueError("real features require a path")
        return load_real_features(spec.path, g)
    raise ValueError(f"unknown feature kind {spec.kind!r}")


def build_collection_features(
    coll: GraphCollection, spec: FeatureSpec, rng: Rng | None = None
) -> list:
    """Per-graph feature matrices with collection-wide alignment.

    One-hot indexes nodes by their position inside their own graph with a
    width of ``global_max_nodes``; degree widths use ``global_max_degree``.
    Eigen features on a graph smaller than ``k`` get zero columns past the
    graph's spectrum.
    """
    rng = rng or Rng(spec.seed)
    if spec.kind == "real":
        if coll.node_features is None:
            raise ValueError("collection has no real node features")
        return [FeatureMatrix(values, spec) for values in coll.node_features]
    out = []
    for i, g in enumerate(coll.graphs):
        child = rng.split(f"graph:{i}")
        if spec.kind == "eigen":
            k_eff = min(spec.k, g.num_nodes)
            fm = init_eigen(g, k_eff)
            if k_eff < spec.k:
                padded = np.zeros((g.num_nodes, spec.k))
                padded[:, :k_eff] = fm.values
                fm = FeatureMatrix(padded, fm.spec)
            out.append(fm)
        else:
            out.append(
                build_features(
                    g,
                    spec,
                    child,
                    max_degree=coll.global_max_degree,
                    max_nodes=coll.global_max_nodes,
                )
            )
    return out
