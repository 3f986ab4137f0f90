"""Shared builders for randomized test instances.

Instances are built directly at the distribution level: random conditional
tables (optionally with partial cell coverage), random joint or factored
inputs, random prediction-map hypotheses, and random losses. Everything is
driven by a caller-supplied seeded generator so tests stay deterministic.
"""
from itertools import product

import numpy as np

from driftshap.hypotheses import LossFunction, PredictionMap
from driftshap.risk import RiskConfig
from driftshap.shapley import DistributionValueFunction
from driftshap.tables import (
    ConditionalTable,
    FactorizationPlan,
    InputDistribution,
    Player,
    PopulationDistributions,
)


def prob_vector(rng, n: int) -> np.ndarray:
    v = rng.random(n) + 0.05
    return v / v.sum()


def all_cells(cards):
    return [tuple(c) for c in product(*[range(int(c)) for c in cards])]


def random_conditional(rng, cards, n_classes: int = 2,
                       coverage: float = 1.0) -> ConditionalTable:
    cells = all_cells(cards)
    n_keep = max(1, int(round(coverage * len(cells))))
    chosen = rng.choice(len(cells), size=n_keep, replace=False)
    entries = {cells[int(i)]: prob_vector(rng, n_classes) for i in chosen}
    return ConditionalTable(entries, prob_vector(rng, n_classes))


def random_joint_input(rng, cards) -> InputDistribution:
    cells = all_cells(cards)
    p = prob_vector(rng, len(cells))
    return InputDistribution("joint",
                             table={c: float(pi) for c, pi in zip(cells, p)})


def random_marginals(rng, cards) -> tuple:
    return tuple(prob_vector(rng, int(c)) for c in cards)


def random_hypothesis(rng, cards, n_classes: int = 2) -> PredictionMap:
    mapping = {c: int(rng.integers(0, n_classes))
               for c in all_cells(cards) if rng.random() < 0.9}
    return PredictionMap(mapping, default=int(rng.integers(0, n_classes)))


def random_loss(rng, n_classes: int = 2) -> LossFunction:
    if rng.random() < 0.5:
        return LossFunction.misclassification(n_classes)
    m = rng.uniform(0.5, 3.0, size=(n_classes, n_classes))
    np.fill_diagonal(m, 0.0)
    return LossFunction.cost_matrix(m)


def two_player_instance(rng, n_classes: int = 2,
                        risk_config: RiskConfig = RiskConfig(),
                        share=()) -> DistributionValueFunction:
    """Random k=2 instance (conditional + joint input).

    `share` lists player indices whose target component is replaced with the
    baseline one, creating exact null players.
    """
    cards = rng.integers(2, 4, size=int(rng.integers(1, 4)))
    plan = FactorizationPlan((Player("conditional"), Player("input")))
    cov = float(rng.uniform(0.6, 1.0))
    base = PopulationDistributions(
        "baseline", random_conditional(rng, cards, n_classes, cov),
        random_joint_input(rng, cards))
    cond = base.conditional if 0 in share else random_conditional(
        rng, cards, n_classes, float(rng.uniform(0.6, 1.0)))
    inp = base.input if 1 in share else random_joint_input(rng, cards)
    targ = PopulationDistributions("target", cond, inp)
    return DistributionValueFunction(random_hypothesis(rng, cards, n_classes),
                                     random_loss(rng, n_classes), base, targ,
                                     plan, risk_config)


def factored_instance(rng, k: int, n_classes: int = 2,
                      risk_config: RiskConfig = RiskConfig(),
                      share=()) -> DistributionValueFunction:
    """Random factored instance with one conditional and k-1 marginal players."""
    n_feats = k - 1
    cards = rng.integers(2, 4, size=n_feats)
    plan = FactorizationPlan(
        (Player("conditional"),)
        + tuple(Player("marginal", feature=i) for i in range(n_feats)))
    base = PopulationDistributions(
        "baseline",
        random_conditional(rng, cards, n_classes, float(rng.uniform(0.6, 1.0))),
        InputDistribution("factored", marginals=random_marginals(rng, cards)))
    cond = base.conditional if 0 in share else random_conditional(
        rng, cards, n_classes, float(rng.uniform(0.6, 1.0)))
    marginals = list(random_marginals(rng, cards))
    for p in share:
        if p >= 1:
            marginals[p - 1] = base.input.marginals[p - 1]
    targ = PopulationDistributions(
        "target", cond, InputDistribution("factored", marginals=tuple(marginals)))
    return DistributionValueFunction(random_hypothesis(rng, cards, n_classes),
                                     random_loss(rng, n_classes), base, targ,
                                     plan, risk_config)


def random_instance(rng, k: int, **kwargs) -> DistributionValueFunction:
    if k == 2 and rng.random() < 0.5:
        return two_player_instance(rng, **kwargs)
    return factored_instance(rng, k, **kwargs)


def swapped(vf: DistributionValueFunction) -> DistributionValueFunction:
    return DistributionValueFunction(vf.q, vf.loss, vf.targ, vf.base, vf.plan,
                                     vf.risk_config)


def brute_force_joint_risk(q, loss, cond, inp) -> float:
    """Independent double-sum risk over a joint input, written as plain loops."""
    total = 0.0
    for cell, px in inp.table.items():
        pred = q.predict(cell)
        vec, _ = cond.probs(cell)
        for y in range(len(vec)):
            total += px * float(vec[y]) * loss.loss(pred, y)
    return total
