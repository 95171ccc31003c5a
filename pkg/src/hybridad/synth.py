"""Desk-scale labeled benchmark: Gaussian clusters plus uniform outliers."""

from __future__ import annotations

import numpy as np

__all__ = ["make_benchmark", "write_benchmark_csv"]

CENTER_SPACING = 10.0


def make_benchmark(n_per_cluster: int = 150, n_clusters: int = 2, n_outliers: int = 10,
                   dims: int = 8, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Unit-variance Gaussian clusters and uniformly scattered outliers.

    Cluster centers are vertices of a regular simplex (scaled basis vectors)
    exactly ``CENTER_SPACING`` apart, so ``n_clusters <= dims`` is required.
    Outliers are uniform over the inliers' bounding box inflated 3x about its
    midpoint. Returns ``(X, labels)`` with label 1 marking outliers.
    """
    if n_per_cluster < 1 or n_clusters < 1 or dims < 1 or n_outliers < 0:
        raise ValueError("counts must be >= 1 (n_outliers >= 0)")
    if n_clusters > dims:
        raise ValueError(f"{n_clusters} simplex centers need dims >= {n_clusters}, got {dims}")
    rng = np.random.default_rng(seed)
    centers = np.eye(dims)[:n_clusters] * (CENTER_SPACING / np.sqrt(2.0))
    if n_clusters == 1:
        centers = np.zeros((1, dims))
    inliers = np.vstack([c + rng.standard_normal((n_per_cluster, dims)) for c in centers])
    lo, hi = inliers.min(axis=0), inliers.max(axis=0)
    mid, half = (lo + hi) / 2.0, 3.0 * (hi - lo) / 2.0
    outliers = rng.uniform(mid - half, mid + half, size=(n_outliers, dims))
    X = np.vstack([inliers, outliers])
    labels = np.r_[np.zeros(len(inliers), dtype=np.int64), np.ones(n_outliers, dtype=np.int64)]
    return X, labels


def write_benchmark_csv(path, X, labels) -> None:
    dims = X.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join([f"x{j}" for j in range(dims)] + ["label"]) + "\n")
        for row, y in zip(X, labels):
            fh.write(",".join(format(v, ".17g") for v in row) + f",{int(y)}\n")
