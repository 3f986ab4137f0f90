"""Seeded synthetic data generators with controllable real and virtual drift.

Families: stagger (categorical rule concepts), sea (x1+x2 threshold), sine,
circle, and rbf (Gaussian centroids, configurable feature count). Concepts are
fixed functional forms; labels can be flipped with a configurable noise rate.

In virtual-drift scenarios the labels are always computed from the
unperturbed values, so the conditional relation is held constant while the
input distribution of the chosen feature changes.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidConceptError, PerturbCategoricalError
from .schema import (
    CATEGORICAL,
    CONTINUOUS,
    BinSpec,
    FeatureSchema,
    FeatureSpec,
    LabelSpec,
    RawTable,
)

FAMILIES = ("stagger", "sea", "sine", "circle", "rbf")

_STAGGER_SIZES = ("large", "medium", "small")
_STAGGER_COLORS = ("blue", "green", "red")
_STAGGER_SHAPES = ("circle", "square", "triangle")

SEA_THRESHOLDS = {1: 8.0, 2: 9.0, 3: 7.0, 4: 9.5}
CIRCLE_RADII = {1: 0.15, 2: 0.2, 3: 0.25, 4: 0.3}
_RBF_STD = 0.12


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    concept_id: int
    n_rows: int
    seed: int
    noise_rate: float = 0.0
    n_features: int = 10   # rbf only
    n_centroids: int = 8   # rbf only

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidConceptError(f"unknown family {self.family!r}")
        if self.n_rows < 1:
            raise ValueError("n_rows must be >= 1")
        if not (0.0 <= self.noise_rate < 1.0):
            raise ValueError("noise_rate must be in [0, 1)")
        valid = {"stagger": (1, 2, 3), "sea": tuple(SEA_THRESHOLDS),
                 "sine": (1, 2), "circle": tuple(CIRCLE_RADII)}
        if self.family in valid and self.concept_id not in valid[self.family]:
            raise InvalidConceptError(
                f"{self.family}: invalid concept id {self.concept_id}")
        if self.family == "rbf" and self.concept_id < 1:
            raise InvalidConceptError("rbf: concept id must be >= 1")


@dataclass(frozen=True)
class Perturbation:
    kind: str              # "uniform-multiplier" | "category-skew"
    feature: str
    low: float = 0.0       # uniform-multiplier
    high: float = 2.0
    boost: float = 3.0     # category-skew: weight on the boosted category
    category: str = ""     # category-skew: which category to overweight
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform-multiplier", "category-skew"):
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "uniform-multiplier" and self.high <= self.low:
            raise ValueError("multiplier range must have high > low")
        if self.kind == "category-skew" and self.boost <= 0:
            raise ValueError("category-skew boost must be positive")


@dataclass(frozen=True)
class DriftScenario:
    baseline: GeneratorSpec
    target: GeneratorSpec
    perturbation: Perturbation | None = None


def stagger_label(size: str, color: str, shape: str, concept_id: int) -> int:
    if concept_id == 1:
        return int(size == "small" and color == "red")
    if concept_id == 2:
        return int(color == "green" or shape == "circle")
    return int(size in ("medium", "large"))


def _rbf_layout(n_features: int, n_centroids: int, concept_id: int):
    """Centroid positions depend only on the geometry; class labels on the concept."""
    pos_rng = np.random.default_rng([7310, n_features, n_centroids])
    centers = pos_rng.uniform(0.0, 1.0, size=(n_centroids, n_features))
    lab_rng = np.random.default_rng([7311, n_features, n_centroids, concept_id])
    classes = np.arange(n_centroids) % 2
    lab_rng.shuffle(classes)
    return centers, classes


def generate(spec: GeneratorSpec) -> RawTable:
    """Deterministic raw rows for a generator spec."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_rows
    if spec.family == "stagger":
        size = rng.choice(_STAGGER_SIZES, size=n)
        color = rng.choice(_STAGGER_COLORS, size=n)
        shape = rng.choice(_STAGGER_SHAPES, size=n)
        y = np.array([stagger_label(s, c, sh, spec.concept_id)
                      for s, c, sh in zip(size, color, shape)], dtype=np.int64)
        cols = {"size": size.astype(object), "color": color.astype(object),
                "shape": shape.astype(object)}
    elif spec.family == "sea":
        x = rng.uniform(0.0, 10.0, size=(n, 3))
        y = (x[:, 0] + x[:, 1] <= SEA_THRESHOLDS[spec.concept_id]).astype(np.int64)
        cols = {"x1": x[:, 0], "x2": x[:, 1], "x3": x[:, 2]}
    elif spec.family == "sine":
        x1 = rng.uniform(0.0, 1.0, size=n)
        x2 = rng.uniform(-1.0, 1.0, size=n)
        below = x2 < np.sin(2.0 * np.pi * x1)
        y = (below if spec.concept_id == 1 else ~below).astype(np.int64)
        cols = {"x1": x1, "x2": x2}
    elif spec.family == "circle":
        x = rng.uniform(0.0, 1.0, size=(n, 2))
        r = CIRCLE_RADII[spec.concept_id]
        inside = (x[:, 0] - 0.5) ** 2 + (x[:, 1] - 0.5) ** 2 <= r * r
        y = inside.astype(np.int64)
        cols = {"x1": x[:, 0], "x2": x[:, 1]}
    else:  # rbf
        centers, classes = _rbf_layout(spec.n_features, spec.n_centroids,
                                       spec.concept_id)
        which = rng.integers(0, spec.n_centroids, size=n)
        x = centers[which] + rng.normal(0.0, _RBF_STD, size=(n, spec.n_features))
        y = classes[which].astype(np.int64)
        cols = {f"x{j + 1}": x[:, j] for j in range(spec.n_features)}
    if spec.noise_rate > 0.0:
        flip = rng.random(n) < spec.noise_rate
        # flip to a uniformly chosen *different* class
        shift = 1 + rng.integers(0, max(1, _n_classes(spec) - 1), size=n)
        y = np.where(flip, (y + shift) % _n_classes(spec), y)
    cols["y"] = np.array([str(int(v)) for v in y], dtype=object)
    return RawTable(cols)


def _n_classes(spec: GeneratorSpec) -> int:
    return 2


def family_schema(spec: GeneratorSpec, bin_count: int = 10,
                  strategy: str = "equal-width") -> FeatureSchema:
    """Draft (unfitted) schema matching a generator family's columns."""
    bins = BinSpec(strategy=strategy, bin_count=bin_count)
    if spec.family == "stagger":
        feats = (
            FeatureSpec("size", CATEGORICAL, categories=tuple(sorted(_STAGGER_SIZES))),
            FeatureSpec("color", CATEGORICAL, categories=tuple(sorted(_STAGGER_COLORS))),
            FeatureSpec("shape", CATEGORICAL, categories=tuple(sorted(_STAGGER_SHAPES))),
        )
    elif spec.family == "sea":
        feats = tuple(FeatureSpec(f"x{j}", CONTINUOUS, binning=bins) for j in (1, 2, 3))
    elif spec.family in ("sine", "circle"):
        feats = tuple(FeatureSpec(f"x{j}", CONTINUOUS, binning=bins) for j in (1, 2))
    else:
        feats = tuple(FeatureSpec(f"x{j + 1}", CONTINUOUS, binning=bins)
                      for j in range(spec.n_features))
    return FeatureSchema(feats, LabelSpec("y", ("0", "1")))


def _perturb(table: RawTable, p: Perturbation) -> RawTable:
    col = table.column(p.feature)
    rng = np.random.default_rng(p.seed)
    n = len(col)
    if p.kind == "uniform-multiplier":
        try:
            vals = np.array([float(v) for v in col], dtype=np.float64)
        except (TypeError, ValueError):
            raise PerturbCategoricalError(
                f"uniform-multiplier needs a continuous feature; {p.feature!r} is categorical")
        out = dict(table.columns)
        out[p.feature] = vals * rng.uniform(p.low, p.high, size=n)
        return RawTable(out, table.weights)
    # category-skew: importance-resample rows so the boosted category is
    # overweighted; rows move wholesale, so P(y|x) is untouched.
    values = np.array([str(v) for v in col], dtype=object)
    cats = sorted(set(values))
    if p.category and p.category not in cats:
        raise PerturbCategoricalError(
            f"category-skew: {p.category!r} not a value of {p.feature!r}")
    boosted = p.category or cats[0]
    w = np.where(values == boosted, p.boost, 1.0)
    idx = rng.choice(n, size=n, p=w / w.sum())
    out = {name: c[idx] for name, c in table.columns.items()}
    weights = table.weights[idx] if table.weights is not None else None
    return RawTable(out, weights)


def apply_scenario(scn: DriftScenario) -> tuple:
    """Generate (baseline, target) raw tables, applying any target perturbation."""
    base = generate(scn.baseline)
    targ = generate(scn.target)
    if scn.perturbation is not None:
        targ = _perturb(targ, scn.perturbation)
    return base, targ


def scenario_manifest(scn: DriftScenario) -> dict:
    doc = {"baseline": asdict(scn.baseline), "target": asdict(scn.target)}
    doc["perturbation"] = asdict(scn.perturbation) if scn.perturbation else None
    return doc
