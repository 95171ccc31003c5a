"""Typed feature matrices, CSV ingestion and the real-vs-synthetic contrast set.

Categorical columns are stored as integer codes into a sorted alphabet so the
whole matrix lives in one float64 array; tree induction and resampling work on
that array directly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DataError,
    EmptyCell,
    EmptySample,
    MissingFile,
    NonFiniteValue,
    RaggedRow,
    SchemaMismatch,
)

__all__ = [
    "ColumnKind",
    "FeatureSchema",
    "FeatureMatrix",
    "LabeledDataset",
    "REAL",
    "SYNTHETIC",
    "load_dataset",
    "load_schema",
    "split_labels",
    "generate_synthetic",
    "label_real_vs_synthetic",
    "subsample",
]

REAL = 0
SYNTHETIC = 1


class ColumnKind(str, Enum):
    NUMERIC = "NUMERIC"
    CATEGORICAL = "CATEGORICAL"


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered ``(name, kind)`` pairs describing the columns."""

    columns: tuple[tuple[str, ColumnKind], ...]

    def __post_init__(self):
        cols = tuple((str(n), ColumnKind(k)) for n, k in self.columns)
        object.__setattr__(self, "columns", cols)
        if not cols:
            raise DataError("schema needs at least one column")
        names = [n for n, _ in cols]
        if any(not n for n in names):
            raise DataError("column names must be non-empty")
        if len(set(names)) != len(names):
            raise DataError(f"duplicate column names in {names}")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.columns]

    @property
    def kinds(self) -> list[ColumnKind]:
        return [k for _, k in self.columns]

    def __len__(self):
        return len(self.columns)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """N records over a :class:`FeatureSchema`.

    ``values`` holds raw reals for numeric columns and category codes for
    categorical ones; ``categories[c]`` is the sorted alphabet of column ``c``
    (empty for numeric columns).
    """

    schema: FeatureSchema
    values: np.ndarray
    categories: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(self.schema):
            raise RaggedRow(
                f"expected {len(self.schema)} values per row, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteValue("feature matrix contains NaN or infinite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        cats = self.categories or tuple(() for _ in self.schema.columns)
        cats = tuple(tuple(c) for c in cats)
        if len(cats) != len(self.schema):
            raise DataError("one category alphabet per column required")
        object.__setattr__(self, "categories", cats)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def numeric_mask(self) -> np.ndarray:
        return np.array([k is ColumnKind.NUMERIC for k in self.schema.kinds])

    def row(self, i: int) -> tuple:
        """Record ``i`` decoded back to floats and category symbols."""
        out = []
        for c, kind in enumerate(self.schema.kinds):
            v = self.values[i, c]
            out.append(float(v) if kind is ColumnKind.NUMERIC else self.categories[c][int(v)])
        return tuple(out)

    def take(self, rows: Sequence[int]) -> "FeatureMatrix":
        return FeatureMatrix(self.schema, self.values[np.asarray(rows, dtype=np.intp)], self.categories)

    def drop_column(self, name: str) -> "FeatureMatrix":
        c = self.schema.names.index(name)
        keep = [j for j in range(self.n_cols) if j != c]
        schema = FeatureSchema(tuple(self.schema.columns[j] for j in keep))
        return FeatureMatrix(schema, self.values[:, keep], tuple(self.categories[j] for j in keep))

    def same_layout(self, other: "FeatureMatrix") -> bool:
        return self.schema == other.schema and self.categories == other.categories

    def __eq__(self, other):
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return self.same_layout(other) and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"FeatureMatrix(n_rows={self.n_rows}, columns={self.schema.names})"

    @classmethod
    def from_records(cls, records: Iterable[Sequence], schema: FeatureSchema) -> "FeatureMatrix":
        """Build a matrix from already-typed records (floats / symbols)."""
        records = [tuple(r) for r in records]
        m = len(schema)
        for r in records:
            if len(r) != m:
                raise RaggedRow(f"record {r!r} has {len(r)} values, expected {m}")
        values = np.empty((len(records), m), dtype=np.float64)
        cats = []
        for c, kind in enumerate(schema.kinds):
            col = [r[c] for r in records]
            if kind is ColumnKind.NUMERIC:
                values[:, c] = [float(v) for v in col]
                cats.append(())
            else:
                alphabet = tuple(sorted({str(v) for v in col}))
                lookup = {s: i for i, s in enumerate(alphabet)}
                values[:, c] = [lookup[str(v)] for v in col]
                cats.append(alphabet)
        return cls(schema, values, tuple(cats))

    @classmethod
    def from_array(cls, array, names: Sequence[str] | None = None) -> "FeatureMatrix":
        """Wrap an all-numeric 2-D array."""
        array = np.asarray(array, dtype=np.float64)
        if array.ndim == 1:
            array = array[:, None]
        names = names or [f"x{j}" for j in range(array.shape[1])]
        schema = FeatureSchema(tuple((n, ColumnKind.NUMERIC) for n in names))
        return cls(schema, array)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """The stacked XY set: real rows first, then synthetic rows."""

    matrix: FeatureMatrix
    labels: np.ndarray
    real_count: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        if labels.shape != (self.matrix.n_rows,):
            raise DataError("labels length must equal matrix row count")
        object.__setattr__(self, "labels", labels)


# ---------------------------------------------------------------------------
# CSV ingestion


def _split_line(line: str, lineno: int) -> list[str]:
    if '"' in line:
        raise DataError(f"line {lineno}: quoted cells are not supported")
    return [cell.strip() for cell in line.split(",")]


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_schema(path) -> FeatureSchema:
    """Read a schema file with one ``name,NUMERIC|CATEGORICAL`` line per column."""
    if not os.path.isfile(path):
        raise MissingFile(f"schema file not found: {path}")
    cols = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = _split_line(line, lineno)
            if len(parts) != 2:
                raise RaggedRow(f"{path}:{lineno}: expected 'name,KIND'")
            try:
                cols.append((parts[0], ColumnKind(parts[1].upper())))
            except ValueError:
                raise DataError(f"{path}:{lineno}: unknown column kind {parts[1]!r}") from None
    return FeatureSchema(tuple(cols))


def load_dataset(path, schema_hint: FeatureSchema | None = None) -> FeatureMatrix:
    """Load a header-first CSV into a :class:`FeatureMatrix`.

    Without a hint a column is numeric iff every cell parses as a finite real.
    Empty cells are rejected rather than imputed.
    """
    if not os.path.isfile(path):
        raise MissingFile(f"input file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DataError(f"{path}: empty file")

    header = _split_line(lines[0], 1)
    m = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        cells = _split_line(line, lineno)
        if len(cells) != m:
            raise RaggedRow(f"{path}:{lineno}: {len(cells)} cells under a {m}-column header")
        for name, cell in zip(header, cells):
            if cell == "":
                raise EmptyCell(f"{path}:{lineno}: empty cell in column {name!r}")
        rows.append(cells)
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(rows)}")

    if schema_hint is not None:
        if schema_hint.names != header:
            raise SchemaMismatch(f"schema columns {schema_hint.names} do not match header {header}")
        kinds = schema_hint.kinds
    else:
        kinds = []
        for c, name in enumerate(header):
            parsed = [_parse_float(r[c]) for r in rows]
            if all(v is not None for v in parsed):
                kinds.append(ColumnKind.NUMERIC)
            else:
                kinds.append(ColumnKind.CATEGORICAL)
    schema = FeatureSchema(tuple(zip(header, kinds)))

    records = []
    for lineno, cells in enumerate(rows, 2):
        rec = []
        for c, kind in enumerate(kinds):
            if kind is ColumnKind.NUMERIC:
                v = _parse_float(cells[c])
                if v is None:
                    raise DataError(f"{path}:{lineno}: {cells[c]!r} is not numeric in column {header[c]!r}")
                if not math.isfinite(v):
                    raise NonFiniteValue(f"{path}:{lineno}: non-finite value {cells[c]!r} in column {header[c]!r}")
                rec.append(v)
            else:
                rec.append(cells[c])
        records.append(rec)
    return FeatureMatrix.from_records(records, schema)


def split_labels(x: FeatureMatrix, label_col: str) -> tuple[FeatureMatrix, np.ndarray]:
    """Detach a 0/1 ground-truth column from the features."""
    if label_col not in x.schema.names:
        raise DataError(f"label column {label_col!r} not found in {x.schema.names}")
    c = x.schema.names.index(label_col)
    kind = x.schema.kinds[c]
    if kind is ColumnKind.NUMERIC:
        raw = x.values[:, c]
    else:
        try:
            raw = np.array([float(x.categories[c][int(v)]) for v in x.values[:, c]])
        except ValueError:
            raise DataError(f"label column {label_col!r} must hold 0/1 values") from None
    if not np.all((raw == 0) | (raw == 1)):
        raise DataError(f"label column {label_col!r} must hold 0/1 values")
    return x.drop_column(label_col), raw.astype(np.int64)


# ---------------------------------------------------------------------------
# contrast data


def generate_synthetic(x: FeatureMatrix, seed) -> FeatureMatrix:
    """Sample Y from the product of the empirical column marginals of ``x``.

    Each column is resampled independently (with replacement, N draws), which
    keeps every marginal and destroys the dependence between columns.
    """
    n = x.n_rows
    if n == 0:
        raise DataError("cannot resample an empty matrix")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(n, x.n_cols))
    values = np.take_along_axis(x.values, idx, axis=0)
    return FeatureMatrix(x.schema, values, x.categories)


def label_real_vs_synthetic(x: FeatureMatrix, y: FeatureMatrix) -> LabeledDataset:
    if not x.same_layout(y):
        raise SchemaMismatch("real and synthetic matrices do not share a schema")
    stacked = FeatureMatrix(x.schema, np.vstack([x.values, y.values]), x.categories)
    labels = np.concatenate([np.full(x.n_rows, REAL), np.full(y.n_rows, SYNTHETIC)])
    return LabeledDataset(stacked, labels, x.n_rows)


def subsample(x: FeatureMatrix, labels, fraction: float, seed) -> tuple[FeatureMatrix, np.ndarray]:
    """Uniformly draw ``ceil(fraction * N)`` rows without replacement."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    labels = np.asarray(labels)
    if labels.shape[0] != x.n_rows:
        raise DataError("labels must align with matrix rows")
    if fraction == 1.0:
        return x, labels
    # round first so 0.7 * 100 does not ceil to 71
    size = math.ceil(round(fraction * x.n_rows, 9))
    if size < 2:
        raise EmptySample(f"fraction {fraction} of {x.n_rows} rows leaves {size} < 2 rows")
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(x.n_rows, size=size, replace=False))
    return x.take(rows), labels[rows]
