"""Empirical probability tables and hybrid assembly under a surrogate assignment.

A factorization plan lists the "players": always one conditional component,
plus either one joint input component or one marginal per feature. A surrogate
assignment is a binary vector aligned to the players; bit 0 selects the
baseline table for that component and bit 1 the target table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PlanMismatchError, SchemaMismatchError
from .schema import BinnedDataset, FeatureSchema

_NORM_TOL = 1e-12

CONDITIONAL = "conditional"
INPUT_JOINT = "input"
INPUT_MARGINAL = "marginal"

CELL_SEP = "|"


def _check_probs(vec, what):
    vec = np.asarray(vec, dtype=np.float64)
    if np.any(vec < 0):
        raise ValueError(f"{what}: negative probability")
    if abs(float(vec.sum()) - 1.0) > _NORM_TOL:
        raise ValueError(f"{what}: probabilities sum to {vec.sum()}, not 1")
    return vec


def cell_key(cell) -> str:
    return CELL_SEP.join(str(int(i)) for i in cell)


def parse_cell_key(key: str) -> tuple:
    return tuple(int(p) for p in key.split(CELL_SEP))


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """Empirical P(y|x) over observed cells with a class-prior fallback."""
    entries: dict          # cell tuple -> (n_classes,) probability vector
    class_prior: np.ndarray
    coverage: dict = field(default_factory=dict)  # population tag -> fraction of cells present

    def __post_init__(self):
        _check_probs(self.class_prior, "class_prior")
        for cell, vec in self.entries.items():
            _check_probs(vec, f"P(y|{cell})")

    @property
    def n_classes(self) -> int:
        return len(self.class_prior)

    def probs(self, cell) -> tuple:
        """Probability vector for a cell plus whether the prior fallback was used."""
        vec = self.entries.get(tuple(cell))
        if vec is None:
            return self.class_prior, True
        return vec, False

    def to_json_dict(self) -> dict:
        return {
            "entries": {cell_key(c): [float(p) for p in v] for c, v in sorted(self.entries.items())},
            "class_prior": [float(p) for p in self.class_prior],
            "coverage": {t: float(f) for t, f in sorted(self.coverage.items())},
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ConditionalTable":
        entries = {parse_cell_key(k): np.array(v, dtype=np.float64)
                   for k, v in doc["entries"].items()}
        return cls(entries, np.array(doc["class_prior"], dtype=np.float64),
                   dict(doc.get("coverage", {})))


@dataclass(frozen=True, eq=False)
class InputDistribution:
    """Either a joint table over cells or a product of per-feature marginals."""
    form: str                       # "joint" | "factored"
    table: dict | None = None       # joint: cell tuple -> probability
    marginals: tuple | None = None  # factored: per-feature probability arrays

    def __post_init__(self):
        if self.form == "joint":
            if self.table is None:
                raise ValueError("joint form needs a table")
            _check_probs(list(self.table.values()), "joint input table")
        elif self.form == "factored":
            if not self.marginals:
                raise ValueError("factored form needs marginals")
            for i, m in enumerate(self.marginals):
                _check_probs(m, f"marginal[{i}]")
        else:
            raise ValueError(f"unknown input form {self.form!r}")

    @property
    def n_cells(self) -> int:
        if self.form == "joint":
            return len(self.table)
        # math.prod: the product domain can overflow fixed-width integers
        return math.prod(len(m) for m in self.marginals)

    def to_json_dict(self) -> dict:
        if self.form == "joint":
            return {"form": "joint",
                    "table": {cell_key(c): float(p) for c, p in sorted(self.table.items())}}
        return {"form": "factored",
                "marginals": [[float(p) for p in m] for m in self.marginals]}


@dataclass(frozen=True)
class Player:
    kind: str          # conditional | input | marginal
    feature: int = -1  # marginal only
    name: str = ""

    def __post_init__(self):
        if self.kind not in (CONDITIONAL, INPUT_JOINT, INPUT_MARGINAL):
            raise ValueError(f"unknown player kind {self.kind!r}")
        if self.kind == INPUT_MARGINAL and self.feature < 0:
            raise ValueError("marginal player needs a feature index")
        if not self.name:
            default = f"feature_{self.feature}" if self.kind == INPUT_MARGINAL else self.kind
            object.__setattr__(self, "name", default)


@dataclass(frozen=True)
class FactorizationPlan:
    players: tuple

    def __post_init__(self):
        kinds = [p.kind for p in self.players]
        if kinds.count(CONDITIONAL) != 1 or kinds[0] != CONDITIONAL:
            raise ValueError("plan needs exactly one conditional player, listed first")
        rest = kinds[1:]
        if rest == [INPUT_JOINT]:
            pass
        elif rest and all(k == INPUT_MARGINAL for k in rest):
            idx = sorted(p.feature for p in self.players[1:])
            if idx != list(range(len(idx))):
                raise ValueError("marginal players must partition the feature set")
        else:
            raise ValueError("input players must be one joint or one marginal per feature")

    @property
    def k(self) -> int:
        return len(self.players)

    @property
    def is_factored(self) -> bool:
        return self.players[1].kind == INPUT_MARGINAL

    @classmethod
    def two_player(cls, schema: FeatureSchema) -> "FactorizationPlan":
        return cls((Player(CONDITIONAL), Player(INPUT_JOINT)))

    @classmethod
    def per_feature(cls, schema: FeatureSchema) -> "FactorizationPlan":
        players = [Player(CONDITIONAL)]
        players += [Player(INPUT_MARGINAL, feature=i, name=f.name)
                    for i, f in enumerate(schema.features)]
        return cls(tuple(players))


@dataclass(frozen=True, eq=False)
class PopulationDistributions:
    tag: str
    conditional: ConditionalTable
    input: InputDistribution


def estimate_conditional(data: BinnedDataset, smoothing: float = 0.0) -> ConditionalTable:
    """Smoothed class frequencies per observed cell, plus a global class prior."""
    if smoothing < 0:
        raise ValueError("smoothing must be non-negative")
    n_classes = data.schema.label.n_classes
    uniq, inv = np.unique(data.cells, axis=0, return_inverse=True)
    counts = np.zeros((len(uniq), n_classes), dtype=np.float64)
    np.add.at(counts, (inv, data.labels), data.weights)
    totals = counts.sum(axis=1)
    probs = (counts + smoothing) / (totals + smoothing * n_classes)[:, None]
    entries = {tuple(int(v) for v in uniq[i]): probs[i] for i in range(len(uniq))}
    class_counts = np.zeros(n_classes, dtype=np.float64)
    np.add.at(class_counts, data.labels, data.weights)
    prior = (class_counts + smoothing) / (class_counts.sum() + smoothing * n_classes)
    return ConditionalTable(entries, prior)


def estimate_input(data: BinnedDataset, plan: FactorizationPlan,
                   smoothing: float = 0.0) -> InputDistribution:
    """Joint cell frequencies, or smoothed per-feature marginals over the full domain."""
    if smoothing < 0:
        raise ValueError("smoothing must be non-negative")
    total = float(data.weights.sum())
    if not plan.is_factored:
        uniq, inv = np.unique(data.cells, axis=0, return_inverse=True)
        mass = np.zeros(len(uniq), dtype=np.float64)
        np.add.at(mass, inv, data.weights)
        mass /= total
        table = {tuple(int(v) for v in uniq[i]): float(mass[i])
                 for i in range(len(uniq)) if mass[i] > 0}
        return InputDistribution("joint", table=table)
    cards = data.schema.cardinalities()
    marginals = []
    for j in range(data.schema.n_features):
        cnt = np.zeros(cards[j], dtype=np.float64)
        np.add.at(cnt, data.cells[:, j], data.weights)
        marginals.append((cnt + smoothing) / (total + smoothing * cards[j]))
    return InputDistribution("factored", marginals=tuple(marginals))


def conditional_coverage(table: ConditionalTable, data: BinnedDataset) -> float:
    """Fraction of a population's distinct cells present in the table's entries."""
    cells = data.distinct_cells()
    present = sum(1 for c in cells if tuple(int(v) for v in c) in table.entries)
    return present / len(cells)


def assemble_hybrid(base: PopulationDistributions, targ: PopulationDistributions,
                    plan: FactorizationPlan, bits) -> tuple:
    """Compose the hybrid (conditional, input) selected by a surrogate assignment.

    All-zeros reproduces the baseline pair exactly and all-ones the target pair.
    """
    bits = tuple(int(b) for b in bits)
    if len(bits) != plan.k:
        raise PlanMismatchError(f"assignment length {len(bits)} != plan k {plan.k}")
    if any(b not in (0, 1) for b in bits):
        raise PlanMismatchError("surrogate bits must be 0 or 1")
    cond = targ.conditional if bits[0] else base.conditional
    if not plan.is_factored:
        inp = targ.input if bits[1] else base.input
        return cond, inp
    for pops in (base, targ):
        if pops.input.form != "factored":
            raise PlanMismatchError("per-feature plan needs factored inputs")
    marginals = []
    for player, bit in zip(plan.players[1:], bits[1:]):
        src = targ if bit else base
        marginals.append(src.input.marginals[player.feature])
    return cond, InputDistribution("factored", marginals=tuple(marginals))
