"""Built-in evaluation suites: exact toy scenarios and synthetic drift runs.

The toy suite builds three two-player scenarios over three binary features
directly at the distribution level (conjunction vs. disjunction concepts,
uniform vs. shifted inputs) where the attributions have known closed values.
The synthetic suite runs the generator families under a concept-change and a
feature-perturbation scenario and checks sign/ordering expectations.
"""
from __future__ import annotations

import json
import os
from itertools import product

import numpy as np

from .generators import (
    DriftScenario,
    GeneratorSpec,
    Perturbation,
    apply_scenario,
    family_schema,
)
from .hypotheses import BooleanRule, LossFunction, train_tree
from .risk import RiskConfig
from .schema import (
    CATEGORICAL,
    FeatureSchema,
    FeatureSpec,
    LabelSpec,
    RawTable,
    encode,
    fit_bins,
)
from .shapley import (
    DistributionValueFunction,
    shapley_exact,
    shapley_monte_carlo,
    shapley_two_player,
)
from .tables import (
    ConditionalTable,
    FactorizationPlan,
    InputDistribution,
    PopulationDistributions,
    conditional_coverage,
    estimate_conditional,
    estimate_input,
)

# ---------------------------------------------------------------------------
# Toy scenarios: three binary features, binary label, q = x1 and x2 and x3.

TOY_CELLS = [tuple(c) for c in product((0, 1), repeat=3)]

# Shifted input: more mass on the cells where conjunction and disjunction
# disagree (0.13 each) than on the two cells where they agree (0.11 each).
TOY_SHIFT_AGREE = 0.11
TOY_SHIFT_DISAGREE = 0.13

TOY_EXPECTED = {
    "real-drift": {"conditional": 0.75, "input": 0.0, "risk_baseline": 0.0,
                   "risk_target": 0.75},
    "virtual-drift": {"conditional": 0.0, "input": 0.03, "risk_baseline": 0.75,
                      "risk_target": 0.78},
    "combined": {"conditional": 0.765, "input": 0.015, "risk_baseline": 0.0,
                 "risk_target": 0.78},
}


def _conj(cell) -> int:
    return int(all(cell))


def _disj(cell) -> int:
    return int(any(cell))


def toy_schema() -> FeatureSchema:
    feats = tuple(FeatureSpec(f"x{j}", CATEGORICAL, categories=("0", "1"))
                  for j in (1, 2, 3))
    return FeatureSchema(feats, LabelSpec("y", ("0", "1")))


def _onehot_conditional(rule) -> ConditionalTable:
    entries = {}
    for cell in TOY_CELLS:
        vec = np.zeros(2)
        vec[rule(cell)] = 1.0
        entries[cell] = vec
    return ConditionalTable(entries, np.array([0.5, 0.5]))


def _toy_input(shifted: bool) -> InputDistribution:
    if not shifted:
        return InputDistribution("joint", table={c: 1.0 / 8.0 for c in TOY_CELLS})
    table = {c: (TOY_SHIFT_AGREE if _conj(c) == _disj(c) else TOY_SHIFT_DISAGREE)
             for c in TOY_CELLS}
    return InputDistribution("joint", table=table)


def toy_value_function(scenario: str) -> DistributionValueFunction:
    schema = toy_schema()
    if scenario == "real-drift":
        base = PopulationDistributions("baseline", _onehot_conditional(_conj),
                                       _toy_input(False))
        targ = PopulationDistributions("target", _onehot_conditional(_disj),
                                       _toy_input(False))
    elif scenario == "virtual-drift":
        base = PopulationDistributions("baseline", _onehot_conditional(_disj),
                                       _toy_input(False))
        targ = PopulationDistributions("target", _onehot_conditional(_disj),
                                       _toy_input(True))
    elif scenario == "combined":
        base = PopulationDistributions("baseline", _onehot_conditional(_conj),
                                       _toy_input(False))
        targ = PopulationDistributions("target", _onehot_conditional(_disj),
                                       _toy_input(True))
    else:
        raise ValueError(f"unknown toy scenario {scenario!r}")
    q = BooleanRule.parse("x1 and x2 and x3", schema)
    loss = LossFunction.misclassification(2)
    plan = FactorizationPlan.two_player(schema)
    return DistributionValueFunction(q, loss, base, targ, plan)


def toy_raw_tables(scenario: str) -> tuple:
    """The same scenarios expressed as 8-row weighted tables for the CSV pipeline."""
    base_rule = {"real-drift": _conj, "virtual-drift": _disj, "combined": _conj}[scenario]
    targ_rule = {"real-drift": _disj, "virtual-drift": _disj, "combined": _disj}[scenario]
    targ_shifted = scenario in ("virtual-drift", "combined")

    def table(rule, shifted):
        cols = {f"x{j + 1}": np.array([str(c[j]) for c in TOY_CELLS], dtype=object)
                for j in range(3)}
        cols["y"] = np.array([str(rule(c)) for c in TOY_CELLS], dtype=object)
        if shifted:
            weights = np.array([TOY_SHIFT_AGREE if _conj(c) == _disj(c)
                                else TOY_SHIFT_DISAGREE for c in TOY_CELLS])
        else:
            weights = np.full(len(TOY_CELLS), 1.0 / 8.0)
        return RawTable(cols, weights)

    return table(base_rule, False), table(targ_rule, targ_shifted)


def toy_schema_dict() -> dict:
    return toy_schema().to_json_dict()


def run_toy_suite(tolerance: float = 1e-9) -> list:
    """Run the three toy scenarios with the closed-form and exact estimators."""
    results = []
    for name, expected in TOY_EXPECTED.items():
        vf = toy_value_function(name)
        rep = shapley_two_player(vf)
        exact = shapley_exact(toy_value_function(name))
        row = {
            "scenario": name,
            "phi": dict(rep.phi),
            "risk_baseline": rep.risk_baseline.value,
            "risk_target": rep.risk_target.value,
            "expected": expected,
            "closed_form_matches_exact": all(
                abs(rep.phi[p] - exact.phi[p]) <= 1e-12 for p in rep.phi),
        }
        row["passed"] = (
            abs(rep.phi["conditional"] - expected["conditional"]) <= tolerance
            and abs(rep.phi["input"] - expected["input"]) <= tolerance
            and abs(rep.risk_baseline.value - expected["risk_baseline"]) <= tolerance
            and abs(rep.risk_target.value - expected["risk_target"]) <= tolerance
            and row["closed_form_matches_exact"]
        )
        results.append(row)
    return results


# ---------------------------------------------------------------------------
# Synthetic suite.

SYNTHETIC_FAMILIES = ("stagger", "sea", "sine", "circle")

# Depth is per family: deep enough to track the concept, shallow enough that
# the model keeps making errors whose placement depends on the input mix.
FAMILY_DEPTH = {"stagger": 1, "sea": 3, "sine": 3, "circle": 3, "rbf": 3}

FAMILY_CONCEPTS = {"stagger": (1, 2), "sea": (1, 2), "sine": (1, 2),
                   "circle": (1, 3)}

FAMILY_PERTURB_FEATURE = {"stagger": "size", "sea": "x1", "sine": "x1",
                          "circle": "x1"}


def _build_perturbation(family: str, feature: str, seed: int) -> Perturbation:
    if family == "stagger":
        return Perturbation("category-skew", feature, boost=3.0,
                            category="small", seed=seed)
    # (0, 3) keeps the multiplier centered away from 1 so the perturbed
    # feature's risk contribution stays clear of estimation noise.
    return Perturbation("uniform-multiplier", feature, low=0.0, high=3.0, seed=seed)


def synthetic_scenario(family: str, scenario: str, seed: int, rows: int,
                       feature: str | None = None,
                       n_features: int = 10) -> DriftScenario:
    c1, c2 = FAMILY_CONCEPTS.get(family, (1, 2))
    feature = feature or FAMILY_PERTURB_FEATURE.get(family, "x1")
    base = GeneratorSpec(family, c1, rows, seed=seed, n_features=n_features)
    if scenario == "concept-change":
        targ = GeneratorSpec(family, c2, rows, seed=seed + 1000,
                             n_features=n_features)
        return DriftScenario(base, targ, None)
    if scenario == "feature-perturb":
        targ = GeneratorSpec(family, c1, rows, seed=seed + 1000,
                             n_features=n_features)
        return DriftScenario(base, targ, _build_perturbation(family, feature,
                                                             seed + 2000))
    raise ValueError(f"unknown scenario {scenario!r}")


def attribute_scenario(scn: DriftScenario, depth: int | None = None,
                       bin_count: int = 10, estimator: str = "exact",
                       n_permutations: int = 100, mc_seed: int = 0,
                       risk_config: RiskConfig = RiskConfig()):
    """Per-feature attribution of a generated drift scenario."""
    base_raw, targ_raw = apply_scenario(scn)
    schema = fit_bins(base_raw, family_schema(scn.baseline, bin_count=bin_count))
    base_data = encode(base_raw, schema, "baseline")
    targ_data = encode(targ_raw, schema, "target")
    plan = FactorizationPlan.per_feature(schema)
    pops = {}
    for data in (base_data, targ_data):
        cond = estimate_conditional(data)
        cond.coverage[data.tag] = conditional_coverage(cond, data)
        pops[data.tag] = PopulationDistributions(
            data.tag, cond, estimate_input(data, plan))
    depth = depth if depth is not None else FAMILY_DEPTH[scn.baseline.family]
    q = train_tree(base_data, depth)
    loss = LossFunction.misclassification(schema.label.n_classes)
    vf = DistributionValueFunction(q, loss, pops["baseline"], pops["target"],
                                   plan, risk_config)
    if estimator == "exact":
        return shapley_exact(vf)
    return shapley_monte_carlo(vf, n_permutations, seed=mc_seed)


def _split_phi(report) -> tuple:
    phi_real = report.phi["conditional"]
    phi_virtual = {k: v for k, v in report.phi.items() if k != "conditional"}
    return phi_real, phi_virtual


def run_synthetic_suite(family: str, scenario: str, seeds, rows: int = 8000,
                        feature: str | None = None, depth: int | None = None,
                        bin_count: int = 10) -> list:
    """Run one family/scenario over several seeds and evaluate the expectations.

    concept-change: |phi_real| must dominate every per-feature |phi_virtual|.
    feature-perturb: the perturbed feature must carry the largest |phi_virtual|
    and exceed its own value in the matching concept-change run.
    """
    feature = feature or FAMILY_PERTURB_FEATURE.get(family, "x1")
    results = []
    for seed in seeds:
        scn = synthetic_scenario(family, scenario, seed, rows, feature=feature)
        rep = attribute_scenario(scn, depth=depth, bin_count=bin_count)
        phi_real, phi_virtual = _split_phi(rep)
        row = {"family": family, "scenario": scenario, "seed": seed,
               "phi_real": phi_real, "phi_virtual": phi_virtual,
               "risk_baseline": rep.risk_baseline.value,
               "risk_target": rep.risk_target.value}
        if scenario == "concept-change":
            row["real_dominates"] = abs(phi_real) > max(abs(v) for v in
                                                        phi_virtual.values())
        else:
            largest = max(phi_virtual, key=lambda k: abs(phi_virtual[k]))
            row["perturbed_feature"] = feature
            row["perturbed_is_largest"] = largest == feature
            ref = synthetic_scenario(family, "concept-change", seed, rows)
            ref_rep = attribute_scenario(ref, depth=depth, bin_count=bin_count)
            _, ref_virtual = _split_phi(ref_rep)
            row["exceeds_concept_change"] = (abs(phi_virtual[feature])
                                             > abs(ref_virtual[feature]))
        results.append(row)
    return results


def write_suite_outputs(results: list, out_dir: str, suite: str) -> dict:
    """Emit machine-readable results, a text table, and per-scenario plot data."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {"results": os.path.join(out_dir, f"{suite}_results.json"),
             "table": os.path.join(out_dir, f"{suite}_table.txt")}
    with open(paths["results"], "w", encoding="utf-8") as fh:
        json.dump(results, fh, sort_keys=True, indent=2)
        fh.write("\n")
    lines = []
    for row in results:
        if suite == "toy":
            lines.append(
                f"{row['scenario']:<14} phi(cond)={row['phi']['conditional']:+.4f} "
                f"phi(input)={row['phi']['input']:+.4f} "
                f"{'PASS' if row['passed'] else 'FAIL'}")
            plot = {"players": row["phi"]}
            name = row["scenario"]
        else:
            virt = " ".join(f"{k}={v:+.3g}" for k, v in
                            sorted(row["phi_virtual"].items(),
                                   key=lambda kv: -abs(kv[1])))
            lines.append(f"{row['family']:<8} {row['scenario']:<15} "
                         f"seed={row['seed']:<3} real={row['phi_real']:+.3g} {virt}")
            plot = {"players": {"conditional": row["phi_real"], **row["phi_virtual"]}}
            name = f"{row['family']}_{row['scenario']}_seed{row['seed']}"
        ppath = os.path.join(out_dir, f"plot_{name}.json")
        with open(ppath, "w", encoding="utf-8") as fh:
            json.dump(plot, fh, sort_keys=True, indent=2)
            fh.write("\n")
    with open(paths["table"], "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return paths
