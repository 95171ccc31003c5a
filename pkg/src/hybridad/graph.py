"""KNN graph over a distance matrix, community detection and medoid centers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import KTooLarge

__all__ = [
    "NeighborGraph",
    "Clustering",
    "default_k",
    "nearest_neighbors",
    "knn_graph",
    "detect_communities",
    "cluster_centers",
    "write_clustering_csv",
]


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected simple graph; ``edges`` holds pairs ``(i, j)`` with ``i < j``."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.edges:
            if not 0 <= i < j < self.n:
                raise ValueError(f"bad edge {(i, j)} for a graph on {self.n} nodes")

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(sorted(self.edges))
        return g


@dataclass
class Clustering:
    """Partition of the points with one medoid and one cutoff per cluster.

    ``members[c]`` is sorted ascending; ``dc`` stays NaN until the cutoffs
    are filled in by the scoring step.
    """

    labels: np.ndarray
    members: list[np.ndarray]
    centers: np.ndarray
    dc: np.ndarray = field(default=None)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.centers = np.asarray(self.centers, dtype=np.int64)
        if self.dc is None:
            self.dc = np.full(len(self.members), np.nan)
        self.dc = np.asarray(self.dc, dtype=np.float64)

    @property
    def n_clusters(self) -> int:
        return len(self.members)


def default_k(n: int) -> int:
    """Neighbor count ``ceil(ln n)``, kept within ``[1, n - 1]``."""
    if n < 2:
        raise ValueError("need at least 2 points")
    return min(max(1, math.ceil(math.log(n))), n - 1)


def nearest_neighbors(d, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other points per row, ties to lower index."""
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if not 1 <= k <= n - 1:
        raise KTooLarge(f"k={k} must lie in [1, {n - 1}] for {n} points")
    masked = d.copy()
    np.fill_diagonal(masked, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")
    return order[:, :k]


def knn_graph(d, k: int) -> NeighborGraph:
    """Union of every node's ``k`` nearest-neighbor edges."""
    nbrs = nearest_neighbors(d, k)
    edges = set()
    for i, row in enumerate(nbrs):
        for j in row:
            j = int(j)
            edges.add((i, j) if i < j else (j, i))
    return NeighborGraph(int(np.asarray(d).shape[0]), frozenset(edges))


def _canonical_labels(groups, n: int) -> np.ndarray:
    # cluster ids ordered by each cluster's smallest member
    labels = np.empty(n, dtype=np.int64)
    for cid, grp in enumerate(sorted((sorted(g) for g in groups), key=lambda g: g[0])):
        labels[grp] = cid
    return labels


def detect_communities(g: NeighborGraph, seed) -> np.ndarray:
    """Louvain modularity communities of the unweighted graph.

    Cluster ids are renumbered by smallest member so the output does not
    depend on the order the algorithm reports communities in.
    """
    if g.n == 0:
        return np.empty(0, dtype=np.int64)
    if not g.edges:
        return np.arange(g.n, dtype=np.int64)
    groups = nx.community.louvain_communities(g.to_networkx(), resolution=1.0, seed=seed)
    return _canonical_labels(groups, g.n)


def cluster_centers(labels, d) -> Clustering:
    """Medoid of each cluster: the member with the smallest distance row-sum
    to its co-members (lowest index wins ties)."""
    labels = np.asarray(labels, dtype=np.int64)
    d = np.asarray(d, dtype=np.float64)
    ids = np.unique(labels)
    if ids.size == 0 or not np.array_equal(ids, np.arange(ids.size)):
        raise ValueError("cluster labels must be the consecutive ids 0..K-1")
    members, centers = [], []
    for c in ids:
        idx = np.flatnonzero(labels == c)
        sums = d[np.ix_(idx, idx)].sum(axis=1)
        members.append(idx)
        centers.append(idx[int(np.argmin(sums))])
    return Clustering(labels, members, np.array(centers))


def write_clustering_csv(path, clustering: Clustering) -> None:
    centers = set(clustering.centers.tolist())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node,cluster,is_center\n")
        for node, c in enumerate(clustering.labels.tolist()):
            fh.write(f"{node},{c},{int(node in centers)}\n")
