"""Toolkit for building structure-based ID/OOD node-classification benchmarks.

Computes structural node scores (PageRank, personalized PageRank, local
clustering coefficient), turns them into popularity / locality / density
data splits, quantifies the induced shifts, and evaluates a simple
propagation-based classifier for OOD robustness and OOD detection.
"""

__version__ = "0.1.0"

from graphshift.graph import (
    Graph,
    NodeFeatures,
    NodeLabels,
    GraphFormatError,
    load_edge_list,
    load_features,
    load_labels,
    largest_connected_component,
    write_edge_list,
)
from graphshift.metrics import (
    PageRankConfig,
    SigmaScores,
    ConvergenceError,
    pagerank,
    personalized_pagerank,
    local_clustering,
    triangle_counts,
    bfs_distances,
    sigma_scores,
    write_sigma_scores,
    read_sigma_scores,
    UNREACHABLE,
)
from graphshift.splits import (
    SplitConfig,
    SplitAssignment,
    SUBSETS,
    generate_split,
    write_split,
    read_split,
)
from graphshift.analysis import (
    ShiftReport,
    class_balance,
    degree_distribution,
    distance_distribution,
    build_shift_report,
    write_histogram_csvs,
)
from graphshift.model import (
    PropagationConfig,
    TrainConfig,
    ClassifierModel,
    TrainingDivergedError,
    normalize_rows,
    propagate_features,
    train,
    predict_proba,
    softmax_entropy,
)
from graphshift.evaluation import (
    EvalReport,
    accuracy,
    accuracy_drop,
    auroc,
    build_report,
    aggregate_reports,
)

__all__ = [
    "Graph",
    "NodeFeatures",
    "NodeLabels",
    "GraphFormatError",
    "load_edge_list",
    "load_features",
    "load_labels",
    "largest_connected_component",
    "write_edge_list",
    "PageRankConfig",
    "SigmaScores",
    "ConvergenceError",
    "pagerank",
    "personalized_pagerank",
    "local_clustering",
    "triangle_counts",
    "bfs_distances",
    "sigma_scores",
    "write_sigma_scores",
    "read_sigma_scores",
    "UNREACHABLE",
    "SplitConfig",
    "SplitAssignment",
    "SUBSETS",
    "generate_split",
    "write_split",
    "read_split",
    "ShiftReport",
    "class_balance",
    "degree_distribution",
    "distance_distribution",
    "build_shift_report",
    "write_histogram_csvs",
    "PropagationConfig",
    "TrainConfig",
    "ClassifierModel",
    "TrainingDivergedError",
    "normalize_rows",
    "propagate_features",
    "train",
    "predict_proba",
    "softmax_entropy",
    "EvalReport",
    "accuracy",
    "accuracy_drop",
    "auroc",
    "build_report",
    "aggregate_reports",
]
