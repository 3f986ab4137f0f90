"""Fixed hypotheses over binned cells plus classification loss functions.

Three hypothesis families are provided: boolean rules parsed from a small
expression grammar, decision trees trained on binned baseline data, and
explicit prediction maps (cell -> class with a default). All of them are
deterministic and total over the schema's cell domain.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import RuleParseError
from .schema import BinnedDataset, FeatureSchema


@dataclass(frozen=True, eq=False)
class LossFunction:
    kind: str            # "misclassification" | "cost-matrix"
    matrix: np.ndarray   # [actual, predicted], non-negative, zero diagonal

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("loss matrix must be square")
        if np.any(m < 0):
            raise ValueError("loss matrix must be non-negative")
        if np.any(np.diag(m) != 0):
            raise ValueError("loss matrix diagonal must be zero")

    @classmethod
    def misclassification(cls, n_classes: int) -> "LossFunction":
        m = np.ones((n_classes, n_classes), dtype=np.float64)
        np.fill_diagonal(m, 0.0)
        return cls("misclassification", m)

    @classmethod
    def cost_matrix(cls, matrix) -> "LossFunction":
        return cls("cost-matrix", np.asarray(matrix, dtype=np.float64))

    @property
    def n_classes(self) -> int:
        return self.matrix.shape[0]

    @property
    def max_loss(self) -> float:
        return float(self.matrix.max())

    def loss(self, predicted: int, actual: int) -> float:
        return float(self.matrix[actual, predicted])


class Hypothesis:
    """Deterministic classifier over binned cells."""

    def predict_cells(self, cells: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, cell) -> int:
        return int(self.predict_cells(np.asarray([cell], dtype=np.int64))[0])

    def to_json_dict(self) -> dict:
        raise NotImplementedError


_TOKEN = re.compile(r"\s*(\(|\)|[A-Za-z_][A-Za-z0-9_]*)")


def _tokenize(text: str):
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise RuleParseError(f"unexpected character at: {text[pos:]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class BooleanRule(Hypothesis):
    """Rule over binary-valued features: `and`, `or`, `not`, parentheses, names.

    A feature counts as true when its encoded index is nonzero; the rule
    predicts class index 1 when the expression holds, else class index 0.
    """

    def __init__(self, expression: str, ast, feature_names):
        self.expression = expression
        self._ast = ast
        self._feature_names = tuple(feature_names)

    @classmethod
    def parse(cls, text: str, schema: FeatureSchema) -> "BooleanRule":
        tokens = _tokenize(text)
        if not tokens:
            raise RuleParseError("empty rule expression")
        names = [f.name for f in schema.features]
        pos = 0

        def peek():
            return tokens[pos] if pos < len(tokens) else None

        def advance():
            nonlocal pos
            tok = tokens[pos]
            pos += 1
            return tok

        def parse_or():
            node = parse_and()
            while peek() == "or":
                advance()
                node = ("or", node, parse_and())
            return node

        def parse_and():
            node = parse_not()
            while peek() == "and":
                advance()
                node = ("and", node, parse_not())
            return node

        def parse_not():
            if peek() == "not":
                advance()
                return ("not", parse_not())
            return parse_atom()

        def parse_atom():
            tok = peek()
            if tok is None:
                raise RuleParseError("unexpected end of expression")
            if tok == "(":
                advance()
                node = parse_or()
                if peek() != ")":
                    raise RuleParseError("missing closing parenthesis")
                advance()
                return node
            if tok in ("and", "or", "not", ")"):
                raise RuleParseError(f"unexpected token {tok!r}")
            advance()
            if tok not in names:
                raise RuleParseError(f"unknown feature {tok!r} in rule")
            return ("var", names.index(tok))

        ast = parse_or()
        if pos != len(tokens):
            raise RuleParseError(f"trailing tokens: {tokens[pos:]!r}")
        return cls(text, ast, names)

    def _eval(self, node, cells):
        op = node[0]
        if op == "var":
            return cells[:, node[1]] != 0
        if op == "not":
            return ~self._eval(node[1], cells)
        a = self._eval(node[1], cells)
        b = self._eval(node[2], cells)
        return (a | b) if op == "or" else (a & b)

    def predict_cells(self, cells: np.ndarray) -> np.ndarray:
        return self._eval(self._ast, np.asarray(cells)).astype(np.int64)

    def to_json_dict(self) -> dict:
        return {"kind": "boolean-rule", "expression": self.expression}


class DecisionTree(Hypothesis):
    """Flattened decision tree over cell indices (split: feature index <= threshold)."""

    def __init__(self, feature, threshold, left, right, leaf):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.int64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.leaf = np.asarray(leaf, dtype=np.int64)

    @property
    def depth(self) -> int:
        def walk(node):
            if self.leaf[node] >= 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))
        return walk(0)

    def predict_cells(self, cells: np.ndarray) -> np.ndarray:
        return kernels.tree_predict(
            np.ascontiguousarray(cells, dtype=np.int64),
            self.feature, self.threshold, self.left, self.right, self.leaf)

    def _nested(self, node=0):
        if self.leaf[node] >= 0:
            return {"class": int(self.leaf[node])}
        return {"feature": int(self.feature[node]),
                "threshold": int(self.threshold[node]),
                "left": self._nested(self.left[node]),
                "right": self._nested(self.right[node])}

    def to_json_dict(self) -> dict:
        return {"kind": "decision-tree", "root": self._nested()}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DecisionTree":
        feature, threshold, left, right, leaf = [], [], [], [], []

        def build(node):
            idx = len(leaf)
            feature.append(-1)
            threshold.append(-1)
            left.append(-1)
            right.append(-1)
            leaf.append(-1)
            if "class" in node:
                leaf[idx] = int(node["class"])
            else:
                feature[idx] = int(node["feature"])
                threshold[idx] = int(node["threshold"])
                left[idx] = build(node["left"])
                right[idx] = build(node["right"])
            return idx

        build(doc["root"])
        return cls(feature, threshold, left, right, leaf)


class PredictionMap(Hypothesis):
    """Explicit cell -> class mapping with a default class for unmapped cells."""

    def __init__(self, mapping: dict, default: int):
        self.mapping = {tuple(int(v) for v in c): int(y) for c, y in mapping.items()}
        self.default = int(default)

    def predict_cells(self, cells: np.ndarray) -> np.ndarray:
        rows = np.asarray(cells, dtype=np.int64).tolist()
        return np.array([self.mapping.get(tuple(r), self.default) for r in rows],
                        dtype=np.int64)

    def to_json_dict(self) -> dict:
        from .tables import cell_key
        return {"kind": "prediction-map", "default": self.default,
                "entries": {cell_key(c): y for c, y in sorted(self.mapping.items())}}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PredictionMap":
        from .tables import parse_cell_key
        mapping = {parse_cell_key(k): int(v) for k, v in doc.get("entries", {}).items()}
        return cls(mapping, int(doc["default"]))


def hypothesis_from_json_dict(doc: dict, schema: FeatureSchema) -> Hypothesis:
    kind = doc.get("kind")
    if kind == "boolean-rule":
        return BooleanRule.parse(doc["expression"], schema)
    if kind == "decision-tree":
        return DecisionTree.from_json_dict(doc)
    if kind == "prediction-map":
        return PredictionMap.from_json_dict(doc)
    raise RuleParseError(f"unknown hypothesis kind {kind!r}")


def _gini(class_weights: np.ndarray) -> float:
    total = class_weights.sum()
    if total <= 0:
        return 0.0
    p = class_weights / total
    return float(1.0 - np.dot(p, p))


def train_tree(data: BinnedDataset, max_depth: int) -> DecisionTree:
    """Greedy Gini tree over discrete cells, deterministic under ties.

    Ties go to the lowest class index at leaves and the lowest feature index
    (then lowest threshold) at splits. Impure nodes are split as long as depth
    remains and some split separates the rows, even at zero Gini gain.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    cells, labels, weights = data.cells, data.labels, data.weights
    n_classes = data.schema.label.n_classes
    cards = data.schema.cardinalities()

    feature, threshold, left, right, leaf = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(-1)
        left.append(-1)
        right.append(-1)
        leaf.append(-1)
        return len(leaf) - 1

    def class_weights(mask):
        cw = np.zeros(n_classes, dtype=np.float64)
        np.add.at(cw, labels[mask], weights[mask])
        return cw

    def build(mask, depth):
        node = new_node()
        cw = class_weights(mask)
        majority = int(np.argmax(cw))  # argmax takes the lowest index on ties
        if depth >= max_depth or np.count_nonzero(cw > 0) <= 1:
            leaf[node] = majority
            return node
        parent_total = cw.sum()
        parent_gini = _gini(cw)
        best = None  # (reduction, feature, threshold)
        sub = cells[mask]
        sub_labels = labels[mask]
        sub_weights = weights[mask]
        for j in range(cells.shape[1]):
            col = sub[:, j]
            for t in range(int(cards[j]) - 1):
                lmask = col <= t
                wl = sub_weights[lmask].sum()
                wr = parent_total - wl
                if wl <= 0 or wr <= 0:
                    continue
                cl = np.zeros(n_classes, dtype=np.float64)
                np.add.at(cl, sub_labels[lmask], sub_weights[lmask])
                cr = cw - cl
                reduction = parent_gini - (wl * _gini(cl) + wr * _gini(cr)) / parent_total
                if best is None or reduction > best[0]:
                    best = (reduction, j, t)
        if best is None:
            leaf[node] = majority
            return node
        _, j, t = best
        feature[node] = j
        threshold[node] = t
        lmask = mask & (cells[:, j] <= t)
        rmask = mask & (cells[:, j] > t)
        left[node] = build(lmask, depth + 1)
        right[node] = build(rmask, depth + 1)
        return node

    build(np.ones(len(labels), dtype=bool), 0)
    return DecisionTree(feature, threshold, left, right, leaf)


def training_error(tree: Hypothesis, data: BinnedDataset) -> float:
    pred = tree.predict_cells(data.cells)
    wrong = (pred != data.labels).astype(np.float64)
    return float(np.dot(wrong, data.weights) / data.weights.sum())
