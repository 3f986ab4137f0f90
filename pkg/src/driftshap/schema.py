"""Feature schemas, bin fitting and encoding of raw rows into discrete cells.

Bin edges are always fitted on the baseline population and then frozen, so
baseline and target rows are encoded against identical domains. Intervals are
left-closed/right-open with the final bin right-closed.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateFeatureWarning,
    EmptyDataError,
    NonNumericError,
    OutOfRangeError,
    SchemaMismatchError,
    UnknownCategoryError,
)

WEIGHT_COLUMN = "__weight"

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"

OTHER_CATEGORY = "__other__"

_STRATEGIES = ("equal-width", "quantile", "explicit-edges")
_POLICIES = ("clamp", "reject")


@dataclass(frozen=True)
class BinSpec:
    strategy: str = "equal-width"
    bin_count: int = 10
    edges: tuple = ()
    out_of_range_policy: str = "clamp"

    def __post_init__(self):
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"unknown bin strategy {self.strategy!r}")
        if self.out_of_range_policy not in _POLICIES:
            raise ValueError(f"unknown out_of_range_policy {self.out_of_range_policy!r}")
        if self.bin_count < 1:
            raise ValueError("bin_count must be >= 1")
        if self.edges:
            e = self.edges
            if len(e) < 2:
                raise ValueError("edges need at least two boundaries")
            increasing = all(b > a for a, b in zip(e, e[1:]))
            degenerate = len(e) == 2 and e[0] == e[1]
            if not (increasing or degenerate):
                raise ValueError("edges must be strictly increasing")

    @property
    def frozen(self) -> bool:
        return bool(self.edges)

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1 if self.edges else self.bin_count


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str
    categories: tuple = ()
    binning: BinSpec | None = None
    other_bucket: bool = False  # categorical only: reserve an index for unseen values

    def __post_init__(self):
        if not self.name:
            raise ValueError("feature name must be non-empty")
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise ValueError(f"categorical feature {self.name!r} needs >= 1 category")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"duplicate categories for feature {self.name!r}")
        elif self.kind == CONTINUOUS:
            if self.binning is None:
                object.__setattr__(self, "binning", BinSpec())
        else:
            raise ValueError(f"unknown feature kind {self.kind!r}")

    @property
    def cardinality(self) -> int:
        if self.kind == CATEGORICAL:
            return len(self.categories) + (1 if self.other_bucket else 0)
        return self.binning.n_bins


@dataclass(frozen=True)
class LabelSpec:
    name: str
    classes: tuple

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ValueError("label needs at least two classes")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("duplicate label classes")

    @property
    def n_classes(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple
    label: LabelSpec

    def __post_init__(self):
        names = [f.name for f in self.features]
        if not names:
            raise ValueError("schema needs at least one feature")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")

    @property
    def n_features(self) -> int:
        return len(self.features)

    def cardinalities(self) -> np.ndarray:
        return np.array([f.cardinality for f in self.features], dtype=np.int64)

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise SchemaMismatchError(f"no feature named {name!r}")

    @property
    def frozen(self) -> bool:
        return all(f.kind == CATEGORICAL or f.binning.frozen for f in self.features)

    def to_json_dict(self) -> dict:
        feats = []
        for f in self.features:
            if f.kind == CATEGORICAL:
                feats.append({
                    "name": f.name, "kind": f.kind,
                    "categories": list(f.categories),
                    "other_bucket": f.other_bucket,
                })
            else:
                feats.append({
                    "name": f.name, "kind": f.kind,
                    "strategy": f.binning.strategy,
                    "bin_count": f.binning.bin_count,
                    "edges": list(f.binning.edges),
                    "out_of_range_policy": f.binning.out_of_range_policy,
                })
        return {"features": feats,
                "label": {"name": self.label.name, "classes": list(self.label.classes)}}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FeatureSchema":
        feats = []
        for fd in doc["features"]:
            if fd["kind"] == CATEGORICAL:
                feats.append(FeatureSpec(fd["name"], CATEGORICAL,
                                         categories=tuple(fd["categories"]),
                                         other_bucket=bool(fd.get("other_bucket", False))))
            else:
                spec = BinSpec(strategy=fd.get("strategy", "equal-width"),
                               bin_count=int(fd.get("bin_count", 10)),
                               edges=tuple(fd.get("edges", ())),
                               out_of_range_policy=fd.get("out_of_range_policy", "clamp"))
                feats.append(FeatureSpec(fd["name"], CONTINUOUS, binning=spec))
        lab = doc["label"]
        return cls(tuple(feats), LabelSpec(lab["name"], tuple(str(c) for c in lab["classes"])))


@dataclass
class RawTable:
    """Column-oriented raw rows; values are kept as strings until encoding."""
    columns: dict
    weights: np.ndarray | None = None

    @property
    def n_rows(self) -> int:
        for col in self.columns.values():
            return len(col)
        return 0

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SchemaMismatchError(f"column {name!r} missing from input table")
        return self.columns[name]

    @classmethod
    def from_csv(cls, path) -> "RawTable":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise EmptyDataError(f"{path}: empty file")
            rows = [r for r in reader if r]
        if not rows:
            raise EmptyDataError(f"{path}: no data rows")
        for r in rows:
            if len(r) != len(header):
                raise SchemaMismatchError(f"{path}: row width does not match header")
        cols = {h: np.array([r[i] for r in rows], dtype=object) for i, h in enumerate(header)}
        weights = None
        if WEIGHT_COLUMN in cols:
            wcol = cols.pop(WEIGHT_COLUMN)
            try:
                weights = np.array([float(v) for v in wcol], dtype=np.float64)
            except ValueError:
                raise NonNumericError(f"{path}: non-numeric {WEIGHT_COLUMN} value")
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise ValueError(f"{path}: {WEIGHT_COLUMN} must be finite and non-negative")
        return cls(cols, weights)

    def to_csv(self, path) -> None:
        names = list(self.columns)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            header = names + ([WEIGHT_COLUMN] if self.weights is not None else [])
            writer.writerow(header)
            cols = [self.columns[n] for n in names]
            for i in range(self.n_rows):
                row = [_fmt(c[i]) for c in cols]
                if self.weights is not None:
                    row.append(repr(float(self.weights[i])))
                writer.writerow(row)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _as_float(col, name) -> np.ndarray:
    out = np.empty(len(col), dtype=np.float64)
    for i, v in enumerate(col):
        if isinstance(v, str) and v.strip() == "":
            raise NonNumericError(f"feature {name!r}: missing value at row {i}")
        try:
            out[i] = float(v)
        except (TypeError, ValueError):
            raise NonNumericError(f"feature {name!r}: unparseable value {v!r} at row {i}")
    if not np.all(np.isfinite(out)):
        raise NonNumericError(f"feature {name!r}: non-finite value")
    return out


@dataclass(frozen=True)
class BinnedDataset:
    schema: FeatureSchema
    cells: np.ndarray    # (n, k) int64 per-feature indices
    labels: np.ndarray   # (n,) int64 class indices
    weights: np.ndarray  # (n,) float64 non-negative
    tag: str             # "baseline" | "target"

    def __post_init__(self):
        n, k = self.cells.shape
        if n < 1:
            raise EmptyDataError("dataset needs at least one row")
        if k != self.schema.n_features:
            raise SchemaMismatchError("cell width does not match schema")
        cards = self.schema.cardinalities()
        if np.any(self.cells < 0) or np.any(self.cells >= cards):
            raise SchemaMismatchError("cell index outside feature domain")
        if np.any(self.labels < 0) or np.any(self.labels >= self.schema.label.n_classes):
            raise SchemaMismatchError("label index outside class domain")
        if self.weights.shape != (n,) or np.any(self.weights < 0):
            raise ValueError("weights must be non-negative, one per row")
        if float(self.weights.sum()) <= 0.0:
            raise EmptyDataError("total row weight is zero")

    @property
    def n_rows(self) -> int:
        return self.cells.shape[0]

    def distinct_cells(self) -> np.ndarray:
        return np.unique(self.cells, axis=0)


def fit_bins(raw_baseline: RawTable, schema_draft: FeatureSchema) -> FeatureSchema:
    """Freeze bin edges for continuous features from the baseline population."""
    if raw_baseline.n_rows == 0:
        raise EmptyDataError("baseline table has no rows")
    feats = []
    for f in schema_draft.features:
        if f.kind == CATEGORICAL:
            feats.append(f)
            continue
        spec = f.binning
        if spec.strategy == "explicit-edges":
            if not spec.frozen:
                raise SchemaMismatchError(f"feature {f.name!r}: explicit-edges without edges")
            feats.append(f)
            continue
        vals = _as_float(raw_baseline.column(f.name), f.name)
        vmin, vmax = float(vals.min()), float(vals.max())
        if vmin == vmax:
            warnings.warn(
                f"feature {f.name!r}: single distinct baseline value {vmin}; using one bin",
                DegenerateFeatureWarning,
            )
            edges = (vmin, vmax)
        elif spec.strategy == "equal-width":
            edges = tuple(np.linspace(vmin, vmax, spec.bin_count + 1).tolist())
        else:  # quantile
            qs = np.quantile(vals, np.linspace(0.0, 1.0, spec.bin_count + 1))
            edges = tuple(np.unique(qs).tolist())
            if len(edges) < 2:
                edges = (vmin, vmax)
        feats.append(replace(f, binning=replace(spec, edges=edges)))
    return FeatureSchema(tuple(feats), schema_draft.label)


def encode(raw: RawTable, schema: FeatureSchema, tag: str) -> BinnedDataset:
    """Encode raw rows into cell/label indices under a frozen schema."""
    n = raw.n_rows
    if n == 0:
        raise EmptyDataError("table has no rows")
    k = schema.n_features
    cells = np.empty((n, k), dtype=np.int64)
    for j, f in enumerate(schema.features):
        col = raw.column(f.name)
        if f.kind == CONTINUOUS:
            if not f.binning.frozen:
                raise SchemaMismatchError(f"feature {f.name!r}: bins not fitted")
            x = _as_float(col, f.name)
            edges = np.asarray(f.binning.edges, dtype=np.float64)
            below = x < edges[0]
            above = x > edges[-1]
            if f.binning.out_of_range_policy == "reject" and (below.any() or above.any()):
                bad = float(x[below | above][0])
                raise OutOfRangeError(
                    f"feature {f.name!r}: value {bad} outside [{edges[0]}, {edges[-1]}]")
            idx = np.searchsorted(edges, x, side="right") - 1
            # clamp handles out-of-range and folds x == last edge into the final bin
            cells[:, j] = np.clip(idx, 0, f.binning.n_bins - 1)
        else:
            mapping = {c: i for i, c in enumerate(f.categories)}
            other = len(f.categories) if f.other_bucket else -1
            idx = np.empty(n, dtype=np.int64)
            for i, v in enumerate(col):
                ci = mapping.get(str(v), other)
                if ci < 0:
                    raise UnknownCategoryError(
                        f"feature {f.name!r}: unknown category {v!r} at row {i}")
                idx[i] = ci
            cells[:, j] = idx
    lab_map = {c: i for i, c in enumerate(schema.label.classes)}
    lcol = raw.column(schema.label.name)
    labels = np.empty(n, dtype=np.int64)
    for i, v in enumerate(lcol):
        try:
            labels[i] = lab_map[str(v)]
        except KeyError:
            raise UnknownCategoryError(f"label: unknown class {v!r} at row {i}")
    weights = raw.weights if raw.weights is not None else np.ones(n, dtype=np.float64)
    return BinnedDataset(schema, cells, labels, np.asarray(weights, dtype=np.float64), tag)


def infer_schema(raw: RawTable, label: str, bin_spec: BinSpec | None = None,
                 other_bucket: bool = False, extra: RawTable | None = None) -> FeatureSchema:
    """Draft a schema from a raw table: numeric columns become continuous features,
    everything else categorical with the observed categories. Label classes are the
    union of the values seen in `raw` and (optionally) `extra`."""
    if label not in raw.columns:
        raise SchemaMismatchError(f"label column {label!r} missing")
    bin_spec = bin_spec or BinSpec()
    feats = []
    for name, col in raw.columns.items():
        if name == label:
            continue
        try:
            _as_float(col, name)
            feats.append(FeatureSpec(name, CONTINUOUS, binning=bin_spec))
        except NonNumericError:
            cats = tuple(sorted({str(v) for v in col}))
            feats.append(FeatureSpec(name, CATEGORICAL, categories=cats,
                                     other_bucket=other_bucket))
    classes = {str(v) for v in raw.column(label)}
    if extra is not None and label in extra.columns:
        classes |= {str(v) for v in extra.column(label)}
    return FeatureSchema(tuple(feats), LabelSpec(label, tuple(sorted(classes))))
