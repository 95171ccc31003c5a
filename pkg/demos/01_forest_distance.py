"""
Forest distance on mixed data
=============================

Train an unsupervised forest to tell real rows from rows resampled out of
each column's marginal, then turn shared routing depth into a distance.
"""

import numpy as np

from hybridad.data import ColumnKind, FeatureMatrix, FeatureSchema, generate_synthetic, label_real_vs_synthetic
from hybridad.forest import ForestParams, build_forest, distance_matrix

# Two numeric columns and one categorical column. Rows 0-19 share a
# numeric/categorical pattern; row 20 breaks it.
rng = np.random.default_rng(0)
schema = FeatureSchema((("height", ColumnKind.NUMERIC),
                        ("weight", ColumnKind.NUMERIC),
                        ("group", ColumnKind.CATEGORICAL)))
records = []
for i in range(20):
    h = rng.normal(170, 5)
    records.append((h, h - 100 + rng.normal(0, 2), "a" if h < 170 else "b"))
records.append((150.0, 95.0, "a"))
x = FeatureMatrix.from_records(records, schema)

###############################################################################
# The contrast sample keeps every marginal but destroys the joint structure.
y = generate_synthetic(x, seed=1)
data = label_real_vs_synthetic(x, y)
print(data.matrix.n_rows, "rows,", int(data.labels.sum()), "synthetic")

###############################################################################
# Fifty fully grown trees; the distance is symmetric with a zero diagonal.
forest = build_forest(data, ForestParams(n_trees=50, seed=2))
d = distance_matrix(forest, x)
print("tree heights:", forest.heights[:10], "...")
print("symmetric:", np.array_equal(d, d.T), " range:", d.min(), d.max())

# The odd row sits farther from everyone than a typical row does.
mean_dist = d.sum(axis=1) / (x.n_rows - 1)
print("mean distance, typical rows:", np.round(np.median(mean_dist[:20]), 3))
print("mean distance, row 20:      ", np.round(mean_dist[20], 3))
