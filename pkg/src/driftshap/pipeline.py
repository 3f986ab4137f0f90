"""End-to-end orchestration: config, ingestion, estimation, attribution, report.

The run pipeline is: fit bins on the baseline -> encode both populations ->
estimate distribution components per the factorization -> build the hypothesis
(training on baseline when it is a tree) -> attribute with the selected
Shapley estimator -> emit a report document.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError
from .hypotheses import (
    BooleanRule,
    LossFunction,
    hypothesis_from_json_dict,
    train_tree,
)
from .risk import RiskConfig
from .schema import (
    BinSpec,
    FeatureSchema,
    RawTable,
    encode,
    fit_bins,
    infer_schema,
)
from .shapley import (
    EXACT_K_LIMIT,
    DistributionValueFunction,
    shapley_exact,
    shapley_monte_carlo,
    shapley_two_player,
)
from .tables import (
    FactorizationPlan,
    PopulationDistributions,
    conditional_coverage,
    estimate_conditional,
    estimate_input,
)

REPORT_SCHEMA_VERSION = 1

_FACTORIZATIONS = ("two-player", "per-feature")
_ESTIMATORS = ("auto", "exact", "monte-carlo")


@dataclass
class RunConfig:
    baseline_path: str = ""
    target_path: str = ""
    label: str = "y"
    schema: dict | None = None           # FeatureSchema JSON dict; inferred when absent
    hypothesis: dict = field(default_factory=lambda: {"kind": "tree", "max_depth": 3})
    loss: dict = field(default_factory=lambda: {"kind": "misclassification"})
    factorization: str = "per-feature"
    estimator: dict = field(default_factory=lambda: {"kind": "auto"})
    smoothing: float = 0.0
    bin_count: int = 10
    bin_strategy: str = "equal-width"
    out_of_range_policy: str = "clamp"
    unknown_category: str = "reject"     # "reject" | "other"
    exact_k_limit: int = EXACT_K_LIMIT
    cell_budget: int = 1_000_000
    risk_samples: int = 100_000
    risk_seed: int = 0
    output: str | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        bad = set(doc) - known
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def validate(self):
        if self.factorization not in _FACTORIZATIONS:
            raise ConfigError(f"factorization must be one of {_FACTORIZATIONS}")
        est = self.estimator.get("kind", "auto")
        if est not in _ESTIMATORS:
            raise ConfigError(f"estimator kind must be one of {_ESTIMATORS}")
        if self.smoothing < 0:
            raise ConfigError("smoothing must be non-negative")
        hk = self.hypothesis.get("kind")
        if hk not in ("tree", "rule", "map", "boolean-rule", "decision-tree",
                      "prediction-map"):
            raise ConfigError(f"unknown hypothesis kind {hk!r}")
        lk = self.loss.get("kind", "misclassification")
        if lk not in ("misclassification", "cost-matrix"):
            raise ConfigError(f"unknown loss kind {lk!r}")
        if self.unknown_category not in ("reject", "other"):
            raise ConfigError("unknown_category must be 'reject' or 'other'")

    def to_canonical_dict(self) -> dict:
        doc = {}
        for name in sorted(self.__dataclass_fields__):
            doc[name] = getattr(self, name)
        return doc

    def config_hash(self) -> str:
        text = json.dumps(self.to_canonical_dict(), sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass(eq=False)
class ReportDocument:
    config: RunConfig
    schema: FeatureSchema
    report: "object"     # AttributionReport
    row_counts: dict
    generated_at: str

    def to_json_dict(self, include_timestamp: bool = True) -> dict:
        doc = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "tool_version": __version__,
            "config_hash": self.config.config_hash(),
            "rows": self.row_counts,
            "schema": self.schema.to_json_dict(),
        }
        doc.update(self.report.to_json_dict())
        if include_timestamp:
            doc["generated_at"] = self.generated_at
        return doc

    def to_json_text(self, include_timestamp: bool = True) -> str:
        return json.dumps(self.to_json_dict(include_timestamp), sort_keys=True,
                          indent=2) + "\n"

    def render_text(self) -> str:
        rep = self.report
        lines = [
            f"risk baseline : {rep.risk_baseline.value:.6g}",
            f"risk target   : {rep.risk_target.value:.6g}",
            f"risk change   : {rep.risk_target.value - rep.risk_baseline.value:.6g}",
            f"estimator     : {rep.estimator['kind']}",
            "attributions (sorted by |phi|):",
        ]
        for name, v in sorted(rep.phi.items(), key=lambda kv: -abs(kv[1])):
            lines.append(f"  {name:<16} {v:+.6g}")
        lines.append(f"efficiency residual: {rep.efficiency_residual:.3g}")
        return "\n".join(lines) + "\n"


def build_loss(cfg: RunConfig, n_classes: int) -> LossFunction:
    if cfg.loss.get("kind", "misclassification") == "misclassification":
        return LossFunction.misclassification(n_classes)
    matrix = cfg.loss.get("matrix")
    if matrix is None:
        path = cfg.loss.get("path")
        if path is None:
            raise ConfigError("cost-matrix loss needs 'matrix' or 'path'")
        with open(path, encoding="utf-8") as fh:
            matrix = json.load(fh)
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (n_classes, n_classes):
        raise ConfigError(
            f"cost matrix shape {m.shape} does not match {n_classes} classes")
    return LossFunction.cost_matrix(m)


def build_hypothesis(cfg: RunConfig, schema, baseline_data):
    hyp = cfg.hypothesis
    kind = hyp.get("kind")
    if kind in ("tree", "decision-tree"):
        if "root" in hyp:
            return hypothesis_from_json_dict({"kind": "decision-tree", **hyp}, schema)
        return train_tree(baseline_data, int(hyp.get("max_depth", 3)))
    if kind in ("rule", "boolean-rule"):
        expr = hyp.get("expression")
        if not expr:
            raise ConfigError("rule hypothesis needs an 'expression'")
        return BooleanRule.parse(expr, schema)
    path = hyp.get("path")
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = {"kind": "prediction-map", **hyp}
    return hypothesis_from_json_dict(doc, schema)


def run_attribute(config: RunConfig, baseline_raw: RawTable | None = None,
                  target_raw: RawTable | None = None) -> ReportDocument:
    """Execute the full attribution pipeline; tables may be passed in-memory."""
    if baseline_raw is None:
        baseline_raw = RawTable.from_csv(config.baseline_path)
    if target_raw is None:
        target_raw = RawTable.from_csv(config.target_path)

    bins = BinSpec(strategy=config.bin_strategy, bin_count=config.bin_count,
                   out_of_range_policy=config.out_of_range_policy)
    if config.schema is not None:
        draft = FeatureSchema.from_json_dict(config.schema)
    else:
        draft = infer_schema(baseline_raw, config.label, bin_spec=bins,
                             other_bucket=(config.unknown_category == "other"),
                             extra=target_raw)
    schema = fit_bins(baseline_raw, draft)
    base_data = encode(baseline_raw, schema, "baseline")
    targ_data = encode(target_raw, schema, "target")

    if config.factorization == "two-player":
        plan = FactorizationPlan.two_player(schema)
    else:
        plan = FactorizationPlan.per_feature(schema)

    pops = {}
    for data in (base_data, targ_data):
        cond = estimate_conditional(data, config.smoothing)
        inp = estimate_input(data, plan, config.smoothing)
        pops[data.tag] = PopulationDistributions(data.tag, cond, inp)
    for tag in ("baseline", "target"):
        table = pops[tag].conditional
        table.coverage["baseline"] = conditional_coverage(table, base_data)
        table.coverage["target"] = conditional_coverage(table, targ_data)

    q = build_hypothesis(config, schema, base_data)
    loss = build_loss(config, schema.label.n_classes)
    risk_cfg = RiskConfig(cell_budget=config.cell_budget,
                          n_samples=config.risk_samples, seed=config.risk_seed)
    vf = DistributionValueFunction(q, loss, pops["baseline"], pops["target"],
                                   plan, risk_cfg)

    est = dict(config.estimator)
    kind = est.get("kind", "auto")
    if kind == "auto":
        kind = "exact" if plan.k <= config.exact_k_limit else "monte-carlo"
    if kind == "exact":
        if config.factorization == "two-player":
            report = shapley_two_player(vf)
        else:
            report = shapley_exact(vf, exact_k_limit=config.exact_k_limit)
    else:
        report = shapley_monte_carlo(vf, int(est.get("n_permutations", 100)),
                                     seed=int(est.get("seed", 0)))
    report.diagnostics["coverage"] = {
        tag: {t: float(f) for t, f in sorted(pops[tag].conditional.coverage.items())}
        for tag in ("baseline", "target")
    }

    doc = ReportDocument(
        config=config,
        schema=schema,
        report=report,
        row_counts={"baseline": base_data.n_rows, "target": targ_data.n_rows},
        generated_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(doc.to_json_text())
    return doc
