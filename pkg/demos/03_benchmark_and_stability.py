"""
Comparing detectors and checking stability
==========================================

AUC of the hybrid detector against Isolation Forest, k-th neighbor
distance and LOF, then AUC across seeded subsamples.
"""

from hybridad.data import FeatureMatrix
from hybridad.evaluation import evaluate_methods, stability_experiment
from hybridad.scoring import HybridConfig
from hybridad.synth import make_benchmark

X, labels = make_benchmark(n_per_cluster=80, n_clusters=3, n_outliers=8, dims=6, seed=5)
x = FeatureMatrix.from_array(X)
config = HybridConfig(n_trees=50)

report = evaluate_methods(x, labels, ["hybrid", "iforest", "knn", "lof"], seed=5, config=config)
for row in report.rows:
    print(f"{row.method:8s} AUC {row.auc:.4f}  ({row.wall_time:.2f}s)")

###############################################################################
# Small fractions occasionally draw no outlier; those seeds are redrawn.
stab = stability_experiment(x, labels, [0.2, 0.5, 1.0], range(3), ["hybrid", "knn"], config)
for (method, fraction), (mean, std) in stab.aggregate().items():
    print(f"{method:8s} {fraction:4.0%}  {mean:.4f} +/- {std:.4f}")
