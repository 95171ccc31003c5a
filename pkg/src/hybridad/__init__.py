"""Hybrid unsupervised anomaly detection.

An unsupervised random forest turns the data into a tree-path distance
matrix; a KNN graph over that matrix is split into communities, and each
point is scored by the ratio of its distance to denser cluster centers over
its local density.
"""

__version__ = "0.1.0"

from .data import FeatureMatrix, FeatureSchema, load_dataset
from .evaluation import auc, stability_experiment
from .forest import ForestParams, build_forest, distance_matrix
from .scoring import HybridConfig, ScoreReport, score_distances, score_pipeline

__all__ = [
    "FeatureMatrix",
    "FeatureSchema",
    "ForestParams",
    "HybridConfig",
    "ScoreReport",
    "auc",
    "build_forest",
    "distance_matrix",
    "load_dataset",
    "score_distances",
    "score_pipeline",
    "stability_experiment",
]
