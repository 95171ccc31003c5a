"""Unsupervised random forest and the tree-path distance it induces.

Trees are grown with entropy / information gain to tell real rows from
synthetic ones. Two original points are similar in a tree when their routing
paths share many edges; averaging the height-normalised overlap over the
forest gives a dissimilarity in ``[0, 1]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed

from .data import FeatureMatrix, LabeledDataset
from .errors import DegenerateSplit

__all__ = [
    "ClassCounts",
    "SplitRule",
    "DecisionTree",
    "ForestParams",
    "Forest",
    "entropy",
    "information_gain",
    "build_tree",
    "bootstrap_sample",
    "build_forest",
    "tree_similarity",
    "path_overlap",
    "distance_matrix",
    "check_distance_matrix",
    "write_distance_csv",
]

# gains closer than this are treated as ties; gains below it as "no gain"
GAIN_TOL = 1e-12


class ClassCounts(NamedTuple):
    n_real: int
    n_synth: int


def entropy(counts) -> float:
    """Two-class Shannon entropy in bits, with ``0 log 0 = 0``."""
    n_real, n_synth = counts
    total = n_real + n_synth
    if n_real < 0 or n_synth < 0 or total < 1:
        raise ValueError(f"invalid class counts {counts!r}")
    h = 0.0
    for c in (n_real, n_synth):
        if 0 < c < total:
            p = c / total
            h -= p * math.log2(p)
    return h


def information_gain(labels, goes_left) -> float:
    """Expected entropy decrease from splitting ``labels`` by ``goes_left``.

    ``labels`` holds 0 (real) / 1 (synthetic) class ids of the node's rows and
    ``goes_left`` is the boolean routing mask of a candidate split.
    """
    labels = np.asarray(labels)
    goes_left = np.asarray(goes_left, dtype=bool)
    n = labels.size
    n_left = int(goes_left.sum())
    if n_left == 0 or n_left == n:
        raise DegenerateSplit("split leaves one side empty")

    def counts(part):
        s = int(np.count_nonzero(part))
        return ClassCounts(part.size - s, s)

    left, right = labels[goes_left], labels[~goes_left]
    return (
        entropy(counts(labels))
        - (left.size / n) * entropy(counts(left))
        - (right.size / n) * entropy(counts(right))
    )


@dataclass(frozen=True)
class SplitRule:
    """Numeric rows go left iff ``value < threshold``; categorical rows go
    left iff their category code is in ``left_set``."""

    feature: int
    threshold: float | None = None
    left_set: frozenset[int] | None = None

    def __post_init__(self):
        if (self.threshold is None) == (self.left_set is None):
            raise ValueError("a split needs exactly one of threshold / left_set")
        if self.left_set is not None and not self.left_set:
            raise ValueError("left_set must be non-empty")

    @property
    def is_numeric(self) -> bool:
        return self.threshold is not None

    def goes_left(self, column) -> np.ndarray:
        column = np.asarray(column)
        if self.is_numeric:
            return column < self.threshold
        return np.isin(column.astype(np.int64), list(self.left_set))


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Array-backed binary tree; node 0 is the root.

    Leaves have ``feature == -1``. A categorical node stores the single
    category routed left in ``category`` (one-vs-rest splits only).
    """

    feature: np.ndarray
    threshold: np.ndarray
    category: np.ndarray
    left: np.ndarray
    right: np.ndarray
    depth: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def height(self) -> int:
        return int(self.depth.max())

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def split(self, node: int) -> SplitRule | None:
        if self.is_leaf(node):
            return None
        f = int(self.feature[node])
        if self.category[node] >= 0:
            return SplitRule(f, left_set=frozenset({int(self.category[node])}))
        return SplitRule(f, threshold=float(self.threshold[node]))

    def leaf_counts(self, node: int) -> ClassCounts:
        return ClassCounts(int(self.counts[node, 0]), int(self.counts[node, 1]))

    def _step(self, node: int, record) -> int:
        f = self.feature[node]
        if self.category[node] >= 0:
            left = int(record[f]) == self.category[node]
        else:
            left = record[f] < self.threshold[node]
        return int(self.left[node] if left else self.right[node])

    def route(self, record) -> list[int]:
        """Node ids visited by an encoded record, root first."""
        path = [0]
        while not self.is_leaf(path[-1]):
            path.append(self._step(path[-1], record))
        return path

    def apply(self, values) -> np.ndarray:
        """Leaf id for every row of an encoded value matrix."""
        values = np.asarray(values)
        out = np.empty(values.shape[0], dtype=np.intp)
        stack = [(0, np.arange(values.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if self.is_leaf(node):
                out[idx] = node
                continue
            mask = self._left_mask(node, values[idx, self.feature[node]])
            stack.append((int(self.left[node]), idx[mask]))
            stack.append((int(self.right[node]), idx[~mask]))
        return out

    def _left_mask(self, node: int, column: np.ndarray) -> np.ndarray:
        if self.category[node] >= 0:
            return column == self.category[node]
        return column < self.threshold[node]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [None if math.isnan(t) else t for t in self.threshold.tolist()],
            "category": self.category.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    mtry: int | None = None  # None -> ceil(sqrt(m))
    max_depth: int = 0  # 0 -> unbounded
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be >= 1")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")

    def features_per_split(self, m: int) -> int:
        return min(m, self.mtry if self.mtry is not None else math.ceil(math.sqrt(m)))


@dataclass(frozen=True, eq=False)
class Forest:
    trees: tuple[DecisionTree, ...]
    params: ForestParams

    def __len__(self):
        return len(self.trees)

    @property
    def heights(self) -> list[int]:
        return [t.height for t in self.trees]

    def to_json(self) -> str:
        return json.dumps(
            {"params": asdict(self.params), "trees": [t.to_dict() for t in self.trees]},
            sort_keys=True,
        )


# ---------------------------------------------------------------------------
# induction


def _xlogx_table(n: int) -> np.ndarray:
    k = np.arange(n + 1, dtype=np.float64)
    k[0] = 1.0
    out = k * np.log2(k)
    out[0] = 0.0
    return out


def _child_entropy_sum(L, n_left, s_left, n_right, s_right, n):
    # sum_children |child|/n * H(child), using |c| H(c) = L(|c|) - L(s) - L(|c|-s)
    return (
        L[n_left] - L[s_left] - L[n_left - s_left]
        + L[n_right] - L[s_right] - L[n_right - s_right]
    ) / n


def _best_numeric(col, ys, n, n_synth, parent_h, L):
    order = np.argsort(col, kind="stable")
    v = col[order]
    bounds = np.flatnonzero(v[1:] != v[:-1])
    if bounds.size == 0:
        return None
    n_left = bounds + 1
    s_left = np.cumsum(ys[order])[bounds]
    gain = parent_h - _child_entropy_sum(L, n_left, s_left, n - n_left, n_synth - s_left, n)
    j = int(np.argmax(gain >= gain.max() - GAIN_TOL))
    lo, hi = v[bounds[j]], v[bounds[j] + 1]
    thr = lo + (hi - lo) / 2.0
    if not lo < thr <= hi:
        thr = hi
    return float(gain[j]), thr


def _best_categorical(col, ys, n, n_synth, parent_h, L):
    codes = col.astype(np.int64)
    present = np.unique(codes)
    if present.size < 2:
        return None
    n_left = np.bincount(codes)[present]
    s_left = np.bincount(codes, weights=ys)[present].astype(np.int64)
    gain = parent_h - _child_entropy_sum(L, n_left, s_left, n - n_left, n_synth - s_left, n)
    j = int(np.argmax(gain >= gain.max() - GAIN_TOL))
    return float(gain[j]), int(present[j])


def build_tree(data: LabeledDataset, params: ForestParams, tree_seed) -> DecisionTree:
    """Greedy entropy tree over ``data`` (already bootstrapped by the caller).

    At each node ``mtry`` distinct features are drawn; the best split over
    them wins, ties going to the lowest feature index and then the lowest
    threshold / category. Growth stops on pure nodes, on zero gain, or at
    ``max_depth``.
    """
    X = data.matrix.values
    ys = data.labels.astype(np.int64)
    L = _xlogx_table(X.shape[0])
    numeric = data.matrix.numeric_mask
    m = X.shape[1]
    mtry = params.features_per_split(m)
    rng = np.random.default_rng(tree_seed)

    feature, threshold, category = [-1], [math.nan], [-1]
    left, right, depth, counts = [-1], [-1], [0], [None]

    stack = [(0, np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, d = stack.pop()
        y = ys[rows]
        n = rows.size
        n_synth = int(y.sum())
        counts[node] = (n - n_synth, n_synth)
        if n_synth == 0 or n_synth == n or (params.max_depth and d >= params.max_depth):
            continue

        parent_h = (L[n] - L[n_synth] - L[n - n_synth]) / n
        best_gain, best = GAIN_TOL, None
        for f in np.sort(rng.choice(m, size=mtry, replace=False)):
            col = X[rows, f]
            if numeric[f]:
                found = _best_numeric(col, y, n, n_synth, parent_h, L)
            else:
                found = _best_categorical(col, y, n, n_synth, parent_h, L)
            if found is not None and found[0] > best_gain + (GAIN_TOL if best else 0.0):
                best_gain, best = found[0], (int(f), found[1])
        if best is None:
            continue

        f, cut = best
        if numeric[f]:
            threshold[node] = cut
            mask = X[rows, f] < cut
        else:
            category[node] = cut
            mask = X[rows, f] == cut
        feature[node] = f
        lid, rid = len(feature), len(feature) + 1
        left[node], right[node] = lid, rid
        for _ in range(2):
            feature.append(-1)
            threshold.append(math.nan)
            category.append(-1)
            left.append(-1)
            right.append(-1)
            depth.append(d + 1)
            counts.append(None)
        # right pushed first so the left subtree is expanded (and draws) first
        stack.append((rid, rows[~mask], d + 1))
        stack.append((lid, rows[mask], d + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        category=np.array(category, dtype=np.int64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        depth=np.array(depth, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64),
    )


def bootstrap_sample(data: LabeledDataset, params: ForestParams, theta: int) -> tuple[LabeledDataset, int]:
    """Bootstrap rows and node-draw seed for tree ``theta``."""
    rng = np.random.default_rng([params.seed, theta])
    n = data.matrix.n_rows
    boot = np.sort(rng.integers(0, n, size=n))
    sample = LabeledDataset(data.matrix.take(boot), data.labels[boot], int(np.sum(boot < data.real_count)))
    return sample, int(rng.integers(2**63 - 1))


def _tree_job(data: LabeledDataset, params: ForestParams, theta: int) -> DecisionTree:
    sample, tree_seed = bootstrap_sample(data, params, theta)
    return build_tree(sample, params, tree_seed)


def build_forest(data: LabeledDataset, params: ForestParams, n_jobs: int | None = 1) -> Forest:
    """Grow ``params.n_trees`` trees, each on its own bootstrap sample.

    Tree ``theta`` depends only on ``(params.seed, theta)``, so the forest is
    identical for any ``n_jobs``.
    """
    if n_jobs in (None, 1):
        trees = [_tree_job(data, params, t) for t in range(params.n_trees)]
    else:
        trees = Parallel(n_jobs=n_jobs)(
            delayed(_tree_job)(data, params, t) for t in range(params.n_trees)
        )
    return Forest(tuple(trees), params)


# ---------------------------------------------------------------------------
# similarity and distance


def tree_similarity(tree: DecisionTree, xi, xj) -> int:
    """Number of edges shared by the root-to-leaf paths of two records."""
    pi, pj = tree.route(np.asarray(xi)), tree.route(np.asarray(xj))
    shared = 0
    for a, b in zip(pi[1:], pj[1:]):
        if a != b:
            break
        shared += 1
    return shared


def path_overlap(tree: DecisionTree, values) -> np.ndarray:
    """All-pairs path overlap for one tree as an ``N x N`` integer matrix.

    Rows separated at a node of depth ``d`` share exactly ``d`` edges; rows in
    the same leaf share the leaf depth.
    """
    values = np.asarray(values)
    n = values.shape[0]
    S = np.zeros((n, n), dtype=np.int64)
    stack = [(0, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        d = tree.depth[node]
        if tree.is_leaf(node):
            S[np.ix_(idx, idx)] = d
            continue
        mask = tree._left_mask(node, values[idx, tree.feature[node]])
        lo, hi = idx[mask], idx[~mask]
        if lo.size and hi.size and d:
            S[np.ix_(lo, hi)] = d
            S[np.ix_(hi, lo)] = d
        stack.append((int(tree.left[node]), lo))
        stack.append((int(tree.right[node]), hi))
    return S


def _tree_term(tree: DecisionTree, values, n_trees: int) -> np.ndarray | None:
    h = tree.height
    if h == 0:
        return None
    return path_overlap(tree, values) / (h * n_trees)


def distance_matrix(forest: Forest, x: FeatureMatrix, n_jobs: int | None = 1) -> np.ndarray:
    """Forest distance ``sqrt(1 - sum_t S_t / (H_t * T))`` between rows of ``x``.

    Every row of ``x`` is routed through every tree, in or out of bag.
    Single-leaf trees add nothing. The diagonal is set to zero.
    """
    values = x.values
    n_trees = len(forest.trees)
    acc = np.zeros((x.n_rows, x.n_rows))
    if n_jobs in (None, 1):
        terms = (_tree_term(t, values, n_trees) for t in forest.trees)
    else:
        terms = Parallel(n_jobs=n_jobs, return_as="generator")(
            delayed(_tree_term)(t, values, n_trees) for t in forest.trees
        )
    # accumulate in tree order so the result does not depend on n_jobs
    for term in terms:
        if term is not None:
            acc += term
    D = np.sqrt(np.maximum(1.0 - acc, 0.0))
    np.fill_diagonal(D, 0.0)
    return D


def check_distance_matrix(d, atol: float = 1e-12) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got {d.shape}")
    if not np.array_equal(d, d.T):
        raise ValueError("distance matrix is not symmetric")
    if np.any(np.diag(d) != 0):
        raise ValueError("distance matrix diagonal must be zero")
    if d.min() < -atol or d.max() > 1 + atol:
        raise ValueError("distance matrix entries must lie in [0, 1]")
    return d


def write_distance_csv(path, d) -> None:
    """N rows of N comma-separated values, 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in np.asarray(d):
            fh.write(",".join(format(v, ".17g") for v in row))
            fh.write("\n")
