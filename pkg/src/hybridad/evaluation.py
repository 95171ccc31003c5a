"""AUC, the subsample-stability experiment and runtime benchmarking."""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import rankdata

from .baselines import isolation_forest_scores, knn_outlier_scores, lof_scores, numeric_view
from .data import FeatureMatrix, subsample
from .errors import DegenerateSubsample, EmptySample, OneClassOnly
from .graph import default_k
from .scoring import HybridConfig, ScoreReport, derive_seed, min_max, score_pipeline

__all__ = [
    "METHODS",
    "EvalRow",
    "EvalReport",
    "auc",
    "run_method",
    "score_method",
    "evaluate_methods",
    "stability_experiment",
    "runtime_benchmark",
]

METHODS = ("hybrid", "iforest", "knn", "lof")
MAX_SUBSAMPLE_ATTEMPTS = 100


def auc(labels, scores) -> float:
    """ROC AUC as the Mann-Whitney statistic, ties counted as one half."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores must have equal length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly("AUC needs both positive and negative labels")
    ranks = rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def run_method(method: str, x: FeatureMatrix, seed: int = 0,
               config: HybridConfig | None = None) -> tuple[np.ndarray, ScoreReport | None]:
    """Scores of one named method, plus the full report for ``hybrid``."""
    config = config or HybridConfig(seed=seed)
    k = config.k or default_k(x.n_rows)
    if method == "hybrid":
        report = score_pipeline(x, replace(config, seed=seed))
        return report.score, report
    if method == "iforest":
        return isolation_forest_scores(numeric_view(x), seed=derive_seed(seed, 3)).scores, None
    if method == "knn":
        return knn_outlier_scores(numeric_view(x), k).scores, None
    if method == "lof":
        return lof_scores(numeric_view(x), k).scores, None
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def score_method(method: str, x: FeatureMatrix, seed: int = 0, config: HybridConfig | None = None) -> np.ndarray:
    """Anomaly scores (higher = more anomalous) of one named method."""
    return run_method(method, x, seed, config)[0]


@dataclass(frozen=True)
class EvalRow:
    method: str
    fraction: float
    seed: int
    auc: float | None
    wall_time: float | None = None


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)
    # method -> (scores, hybrid ScoreReport or None) from the last full-data run
    outputs: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.rows)

    def aggregate(self) -> dict[tuple[str, float], tuple[float, float]]:
        """Mean and population std of AUC per ``(method, fraction)``."""
        groups: dict[tuple[str, float], list[float]] = {}
        for r in self.rows:
            if r.auc is not None:
                groups.setdefault((r.method, r.fraction), []).append(r.auc)
        return {key: (statistics.fmean(v), statistics.pstdev(v)) for key, v in groups.items()}

    def method_means(self) -> dict[str, float]:
        groups: dict[str, list[float]] = {}
        for r in self.rows:
            if r.auc is not None:
                groups.setdefault(r.method, []).append(r.auc)
        return {m: statistics.fmean(v) for m, v in groups.items()}

    def write_csv(self, path, timings: bool = True) -> None:
        """Long-form ``method,fraction,seed,auc,wall_time_s``.

        With ``timings=False`` the time column is left empty so repeated runs
        give identical files.
        """
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("method,fraction,seed,auc,wall_time_s\n")
            for r in self.rows:
                t = "" if not timings or r.wall_time is None else format(r.wall_time, ".6f")
                a = "" if r.auc is None else format(r.auc, ".17g")
                fh.write(f"{r.method},{r.fraction:g},{r.seed},{a},{t}\n")

    def summary(self) -> dict:
        return {
            "per_method_mean_auc": self.method_means(),
            "per_method_fraction": [
                {"method": m, "fraction": f, "mean_auc": mu, "std_auc": sd}
                for (m, f), (mu, sd) in self.aggregate().items()
            ],
        }

    def write_summary(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_scores_csv(self, path) -> None:
        """Per-point scores of every method in one long-form file.

        Baselines leave the hybrid-only ``alpha``, ``beta`` and ``flag``
        columns empty.
        """
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("index,method,alpha,beta,score,score_norm,flag\n")
            for method, (scores, rep) in self.outputs.items():
                norm = min_max(scores)
                for i, s in enumerate(scores):
                    if rep is None:
                        a = b = f = ""
                    else:
                        a, b, f = int(rep.alpha[i]), format(rep.beta[i], ".17g"), int(rep.flags[i])
                    fh.write(f"{i},{method},{a},{b},{s:.17g},{norm[i]:.17g},{f}\n")


def _timed(method, x, seed, config):
    t0 = time.perf_counter()
    out = run_method(method, x, seed, config)
    return out, time.perf_counter() - t0


def evaluate_methods(x: FeatureMatrix, labels, methods=METHODS, seed: int = 0,
                     config: HybridConfig | None = None, repeats: int = 1) -> EvalReport:
    """One row per method on the full data.

    ``wall_time`` is the median over ``repeats`` sequential runs; the AUC
    is left empty when ``labels`` is None.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    report = EvalReport()
    for method in methods:
        times = []
        for _ in range(repeats):
            out, dt = _timed(method, x, seed, config)
            times.append(dt)
        report.outputs[method] = out
        score_auc = auc(labels, out[0]) if labels is not None else None
        report.rows.append(EvalRow(method, 1.0, seed, score_auc, statistics.median(times)))
    return report


def _two_class_subsample(x, labels, fraction, seed):
    for attempt in range(MAX_SUBSAMPLE_ATTEMPTS):
        sx, sy = subsample(x, labels, fraction, derive_seed(seed, 4, attempt))
        if 0 < sy.sum() < sy.size:
            return sx, sy
        if fraction == 1.0:
            break
    raise DegenerateSubsample(
        f"no two-class subsample at fraction {fraction} (seed {seed}) "
        f"after {MAX_SUBSAMPLE_ATTEMPTS} attempts"
    )


def stability_experiment(x: FeatureMatrix, labels, fractions, seeds, methods=("hybrid",),
                         config: HybridConfig | None = None) -> EvalReport:
    """AUC of every method on seeded subsamples at each fraction.

    The subsample depends only on ``(fraction, seed)`` and the scoring only
    on ``(subsample, seed)``, so any row can be reproduced on its own.
    """
    labels = np.asarray(labels)
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValueError(f"fraction must lie in (0, 1], got {f}")
    report = EvalReport()
    for fraction in fractions:
        for seed in seeds:
            try:
                sx, sy = _two_class_subsample(x, labels, fraction, seed)
            except EmptySample as exc:
                raise DegenerateSubsample(str(exc)) from exc
            for method in methods:
                (scores, _), dt = _timed(method, sx, seed, config)
                report.rows.append(EvalRow(method, fraction, seed, auc(sy, scores), dt))
    return report


def runtime_benchmark(x: FeatureMatrix, methods=METHODS, repeats: int = 1, labels=None, seed: int = 0,
                      config: HybridConfig | None = None) -> EvalReport:
    """Median wall-clock scoring time per method over ``repeats`` runs.

    Timing covers scoring only; data loading happens before the call.
    """
    return evaluate_methods(x, labels, methods, seed, config, repeats=repeats)
