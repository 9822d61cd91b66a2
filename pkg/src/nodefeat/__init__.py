"""Artificial node features and a GraphSAGE benchmark harness.

The library builds positional (random, one-hot, eigen, deepwalk) and
structural (shared, degree, degree-bucket, pagerank) node features for
graphs without natural attributes, trains a small GraphSAGE on them, and
aggregates multi-seed benchmark tables for node and graph classification.
"""

from .autodiff import Adam, Tensor, TrainingDivergedError, cross_entropy
from .bench import (
    BenchError,
    GridSpec,
    NodeSplitParams,
    ResultsTable,
    TrialConfig,
    TrialResult,
    aggregate,
    emit_table,
    grid_search,
    make_key,
    run_graph_trial,
    run_node_trial,
)
from .datasets import (
    DatasetFormatError,
    NodeDataset,
    SplitSpec,
    load_node_dataset,
    load_tudataset,
    save_node_dataset,
    save_tudataset,
    split_fraction,
    split_per_class,
    stratified_kfold,
)
from .deepwalk import EmbeddingTable, WalkCorpus, WalkParams, generate_walks, train_skipgram
from .features import (
    FeatureMatrix,
    FeatureSpec,
    build_collection_features,
    build_features,
    init_deepwalk,
    init_degree,
    init_degree_plus,
    init_eigen,
    init_one_hot,
    init_pagerank,
    init_random,
    init_shared,
    load_real_features,
    save_features,
)
from .graph import Graph, GraphCollection, GraphConstructionError, NodeLabels, normalized_adjacency
from .numerics import ConvergenceError, gaussian_matrix, pagerank, top_k_eigs
from .rng import Rng
from .sage import (
    ModelConfig,
    SageLayer,
    SageModel,
    accuracy,
    aggregation_operator,
    disjoint_union,
    readout_operator,
    sample_neighbors,
)

__version__ = "0.1.0"
