"""Hybrid density / distance anomaly scoring on top of the forest distance.

Each point gets a density (how many co-cluster points sit closer than the
cluster's cutoff) and a distance (mean forest distance to the centers of
denser clusters). Their ratio is large for sparse points far from dense
regions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data import FeatureMatrix, generate_synthetic, label_real_vs_synthetic
from .forest import ForestParams, build_forest, distance_matrix
from .graph import Clustering, cluster_centers, default_k, detect_communities, knn_graph

__all__ = [
    "HybridConfig",
    "ScoreReport",
    "nearest_rank",
    "cluster_dc",
    "fill_cutoffs",
    "density",
    "densities",
    "distance_param",
    "distance_params",
    "anomaly_scores",
    "threshold",
    "min_max",
    "score_distances",
    "score_pipeline",
    "derive_seed",
]


def derive_seed(seed: int, *tags: int) -> int:
    """Independent 63-bit seed for a pipeline component."""
    return int(np.random.SeedSequence([int(seed), *tags]).generate_state(2, np.uint64)[0] >> 1)


@dataclass(frozen=True)
class HybridConfig:
    n_trees: int = 100
    k: int = 0  # 0 -> ceil(ln N)
    dc_percentile: float = 20.0
    z: float = 2.5
    seed: int = 0
    mtry: int | None = None
    max_depth: int = 0
    n_jobs: int | None = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not 0.0 < self.dc_percentile < 100.0:
            raise ValueError("dc_percentile must lie in (0, 100)")
        if not self.z > 0.0:
            raise ValueError("z must be positive")


@dataclass
class ScoreReport:
    alpha: np.ndarray
    beta: np.ndarray
    score: np.ndarray
    score_norm: np.ndarray
    threshold: float
    z: float
    flags: np.ndarray
    k: int
    clustering: Clustering
    seed: int = 0
    distances: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.score.size

    def summary(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "K": self.clustering.n_clusters,
            "d_c": [float(v) for v in self.clustering.dc],
            "threshold": float(self.threshold),
            "z": float(self.z),
            "seed": int(self.seed),
            "flagged_count": int(self.flags.sum()),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("index,alpha,beta,score,score_norm,flag\n")
            for i in range(self.n):
                fh.write(
                    f"{i},{int(self.alpha[i])},{self.beta[i]:.17g},{self.score[i]:.17g},"
                    f"{self.score_norm[i]:.17g},{int(self.flags[i])}\n"
                )

    def write_summary(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def nearest_rank(values, percentile: float) -> float:
    """Smallest value with at least ``percentile`` percent of the data at or below it."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    if values.size == 0:
        raise ValueError("no values")
    rank = max(1, math.ceil(round(percentile / 100.0 * values.size, 9)))
    return float(values[rank - 1])


def cluster_dc(members, d, percentile: float) -> float:
    """Nearest-rank percentile of the within-cluster pairwise distances."""
    members = np.asarray(members, dtype=np.int64)
    if members.size < 2:
        return 0.0
    iu = np.triu_indices(members.size, k=1)
    return nearest_rank(np.asarray(d)[np.ix_(members, members)][iu], percentile)


def fill_cutoffs(clustering: Clustering, d, percentile: float) -> Clustering:
    clustering.dc = np.array([cluster_dc(m, d, percentile) for m in clustering.members])
    return clustering


def density(i: int, clustering: Clustering, d) -> int:
    """1 + number of co-cluster points strictly closer than the cluster cutoff."""
    c = clustering.labels[i]
    others = clustering.members[c]
    others = others[others != i]
    return 1 + int(np.count_nonzero(np.asarray(d)[i, others] < clustering.dc[c]))


def densities(clustering: Clustering, d) -> np.ndarray:
    d = np.asarray(d)
    alpha = np.ones(clustering.labels.size, dtype=np.int64)
    for c, idx in enumerate(clustering.members):
        close = d[np.ix_(idx, idx)] < clustering.dc[c]
        np.fill_diagonal(close, False)
        alpha[idx] += close.sum(axis=1)
    return alpha


def distance_param(i: int, clustering: Clustering, alphas, d) -> float:
    """Mean distance from ``i`` to the centers denser than ``i``.

    When no center is denser, the largest distance to any center is used.
    """
    alphas = np.asarray(alphas)
    # index order keeps the sum independent of cluster numbering
    centers = np.sort(clustering.centers)
    dist = np.asarray(d)[i, centers]
    denser = alphas[centers] > alphas[i]
    if denser.any():
        return float(dist[denser].sum() / np.count_nonzero(denser))
    return float(dist.max())


def distance_params(clustering: Clustering, alphas, d) -> np.ndarray:
    return np.array([distance_param(i, clustering, alphas, d) for i in range(len(alphas))])


def anomaly_scores(alphas, betas) -> np.ndarray:
    alphas = np.asarray(alphas)
    if np.any(alphas < 1):
        raise ValueError("densities must be >= 1")
    return np.asarray(betas, dtype=np.float64) / alphas


def threshold(scores, z: float = 2.5) -> float:
    """Cutoff ``exp(mean + z * std) - 1`` of the log-shifted scores.

    ``std`` is the population standard deviation of ``log(score + 1)``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if np.any(scores < 0):
        raise ValueError("scores must be non-negative")
    if not z > 0:
        raise ValueError("z must be positive")
    logged = np.log1p(scores)
    return float(np.expm1(logged.mean() + z * logged.std()))


def min_max(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    span = scores.max() - scores.min()
    if span == 0:
        return np.zeros_like(scores)
    return (scores - scores.min()) / span


def score_distances(d, config: HybridConfig = HybridConfig(), clustering: Clustering | None = None) -> ScoreReport:
    """Everything downstream of the distance matrix.

    Pass ``clustering`` to skip graph construction and community detection.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    k = config.k or default_k(n)
    if clustering is None:
        graph = knn_graph(d, k)
        labels = detect_communities(graph, derive_seed(config.seed, 2))
        clustering = cluster_centers(labels, d)
    fill_cutoffs(clustering, d, config.dc_percentile)
    alpha = densities(clustering, d)
    beta = distance_params(clustering, alpha, d)
    score = anomaly_scores(alpha, beta)
    cut = threshold(score, config.z)
    return ScoreReport(
        alpha=alpha,
        beta=beta,
        score=score,
        score_norm=min_max(score),
        threshold=cut,
        z=config.z,
        flags=score > cut,
        k=k,
        clustering=clustering,
        seed=config.seed,
        distances=d,
    )


def score_pipeline(x: FeatureMatrix, config: HybridConfig = HybridConfig()) -> ScoreReport:
    """Synthetic contrast -> forest -> distance -> graph -> clusters -> scores."""
    synthetic = generate_synthetic(x, derive_seed(config.seed, 0))
    data = label_real_vs_synthetic(x, synthetic)
    params = ForestParams(
        n_trees=config.n_trees,
        mtry=config.mtry,
        max_depth=config.max_depth,
        seed=derive_seed(config.seed, 1),
    )
    forest = build_forest(data, params, n_jobs=config.n_jobs)
    d = distance_matrix(forest, x, n_jobs=config.n_jobs)
    return score_distances(d, config)
