"""Reference detectors: Isolation Forest, k-th neighbor distance and LOF.

All three work in a standardized Euclidean feature space. Categorical
columns are one-hot encoded by :func:`numeric_view` before scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.ensemble import IsolationForest

from .data import ColumnKind, FeatureMatrix
from .errors import KTooLarge

__all__ = [
    "BaselineScores",
    "numeric_view",
    "standardize",
    "fit_isolation_forest",
    "isolation_forest_scores",
    "knn_outlier_scores",
    "lof_scores",
]

# floor on the mean reachability distance; keeps duplicate-heavy points finite
REACH_FLOOR = 1e-10


@dataclass(frozen=True)
class BaselineScores:
    method: str
    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if not np.all(np.isfinite(scores)):
            raise ValueError(f"{self.method}: non-finite scores")
        object.__setattr__(self, "scores", scores)


def standardize(a) -> np.ndarray:
    """Zero mean, unit (population) std per column; constant columns become 0."""
    a = np.asarray(a, dtype=np.float64)
    std = a.std(axis=0)
    out = a - a.mean(axis=0)
    nz = std > 0
    out[:, nz] /= std[nz]
    out[:, ~nz] = 0.0
    return out


def numeric_view(x: FeatureMatrix, scale: bool = True) -> np.ndarray:
    """Numeric columns as-is plus one-hot categorical columns, then scaled."""
    blocks = []
    for c, kind in enumerate(x.schema.kinds):
        col = x.values[:, c]
        if kind is ColumnKind.NUMERIC:
            blocks.append(col[:, None])
        else:
            width = len(x.categories[c])
            blocks.append(np.eye(width)[col.astype(np.int64)])
    a = np.hstack(blocks)
    return standardize(a) if scale else a


def fit_isolation_forest(x, trees: int = 100, subsample: int | None = None, seed=0) -> IsolationForest:
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    psi = min(256, n) if subsample is None else min(subsample, n)
    # fit on a canonical row order so scores do not depend on input order
    canon = x[np.lexsort(x.T[::-1])]
    model = IsolationForest(n_estimators=trees, max_samples=psi, random_state=seed % 2**32)
    return model.fit(canon)


def isolation_forest_scores(x, trees: int = 100, subsample: int | None = None, seed=0) -> BaselineScores:
    """Isolation Forest anomaly score ``2 ** (-E[h(x)] / c(psi))`` in (0, 1).

    ``subsample`` defaults to ``min(256, N)`` points per tree.
    """
    x = np.asarray(x, dtype=np.float64)
    model = fit_isolation_forest(x, trees, subsample, seed)
    return BaselineScores("iforest", -model.score_samples(x))


def _pairwise(x, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n - 1:
        raise KTooLarge(f"k={k} must lie in [1, {n - 1}] for {n} points")
    d = cdist(x, x)
    np.fill_diagonal(d, np.inf)
    return d


def knn_outlier_scores(x, k: int) -> BaselineScores:
    """Distance from each point to its ``k``-th nearest neighbor."""
    d = _pairwise(x, k)
    kth = np.partition(d, k - 1, axis=1)[:, k - 1]
    return BaselineScores("knn", kth)


def lof_scores(x, k: int) -> BaselineScores:
    """Local Outlier Factor with tie-inclusive k-neighborhoods.

    A neighborhood holds every point within the k-distance, so it may have
    more than ``k`` members when distances tie.
    """
    d = _pairwise(x, k)
    k_dist = np.partition(d, k - 1, axis=1)[:, k - 1]
    hood = d <= k_dist[:, None]
    reach = np.maximum(d, k_dist[None, :])
    size = hood.sum(axis=1)
    mean_reach = np.where(hood, reach, 0.0).sum(axis=1) / size
    lrd = 1.0 / np.maximum(mean_reach, REACH_FLOOR)
    lof = (hood * lrd[None, :]).sum(axis=1) / size / lrd
    return BaselineScores("lof", lof)
