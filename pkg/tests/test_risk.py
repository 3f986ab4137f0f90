import numpy as np
import pytest

from driftshap.errors import EnumerationOverflowError
from driftshap.hypotheses import LossFunction, PredictionMap
from driftshap.risk import (
    RiskConfig,
    evaluate_risk,
    evaluate_risk_sampled,
)
from driftshap.tables import ConditionalTable, InputDistribution

from conftest import (
    all_cells,
    brute_force_joint_risk,
    prob_vector,
    random_conditional,
    random_hypothesis,
    random_joint_input,
    random_loss,
    random_marginals,
)


def test_joint_risk_hand_example():
    # one feature, two cells; q predicts 0 everywhere
    cond = ConditionalTable({(0,): np.array([1.0, 0.0]),
                             (1,): np.array([0.25, 0.75])},
                            np.array([0.5, 0.5]))
    inp = InputDistribution("joint", table={(0,): 0.4, (1,): 0.6})
    q = PredictionMap({}, default=0)
    loss = LossFunction.misclassification(2)
    got = evaluate_risk(q, loss, cond, inp)
    assert got.value == pytest.approx(0.6 * 0.75)
    assert got.support_mass == pytest.approx(1.0)
    assert got.fallback_mass == 0.0


def test_joint_risk_fallback_mass_tracked():
    cond = ConditionalTable({(0,): np.array([1.0, 0.0])}, np.array([0.2, 0.8]))
    inp = InputDistribution("joint", table={(0,): 0.7, (1,): 0.3})
    q = PredictionMap({}, default=0)
    loss = LossFunction.misclassification(2)
    got = evaluate_risk(q, loss, cond, inp)
    assert got.fallback_mass == pytest.approx(0.3)
    assert got.value == pytest.approx(0.3 * 0.8)


def test_factored_exact_matches_joint_expansion():
    rng = np.random.default_rng(4)
    for _ in range(25):
        cards = rng.integers(2, 4, size=int(rng.integers(1, 4)))
        cond = random_conditional(rng, cards, coverage=float(rng.uniform(0.5, 1.0)))
        marginals = random_marginals(rng, cards)
        q = random_hypothesis(rng, cards)
        loss = random_loss(rng)
        factored = InputDistribution("factored", marginals=marginals)
        got = evaluate_risk(q, loss, cond, factored)
        # expand the product distribution into an explicit joint table
        table = {}
        for cell in all_cells(cards):
            p = 1.0
            for j, m in enumerate(marginals):
                p *= float(m[cell[j]])
            table[cell] = p
        joint = InputDistribution("joint", table=table)
        want = brute_force_joint_risk(q, loss, cond, joint)
        assert got.value == pytest.approx(want, abs=1e-12)
        assert got.support_mass == pytest.approx(1.0)


def test_sampled_risk_is_deterministic_per_seed():
    rng = np.random.default_rng(8)
    cards = [4, 4, 4]
    cond = random_conditional(rng, cards, coverage=0.7)
    inp = InputDistribution("factored", marginals=random_marginals(rng, cards))
    q = random_hypothesis(rng, cards)
    loss = LossFunction.misclassification(2)
    a = evaluate_risk_sampled(q, loss, cond, inp, 500, seed=42)
    b = evaluate_risk_sampled(q, loss, cond, inp, 500, seed=42)
    c = evaluate_risk_sampled(q, loss, cond, inp, 500, seed=43)
    assert a.value == b.value
    assert a.fallback_mass == b.fallback_mass
    assert a.value != c.value
    assert a.n_samples == 500
    assert a.stderr is not None and a.stderr > 0.0


def test_sampled_risk_converges_to_exact():
    rng = np.random.default_rng(9)
    cards = [3, 3]
    cond = random_conditional(rng, cards)
    inp = InputDistribution("factored", marginals=random_marginals(rng, cards))
    q = random_hypothesis(rng, cards)
    loss = LossFunction.misclassification(2)
    exact = evaluate_risk(q, loss, cond, inp)
    sampled = evaluate_risk_sampled(q, loss, cond, inp, 200_000, seed=1)
    assert abs(sampled.value - exact.value) <= 4.0 * sampled.stderr + 1e-6


def test_cell_budget_switches_to_sampling():
    rng = np.random.default_rng(10)
    cards = [3, 3]
    cond = random_conditional(rng, cards)
    inp = InputDistribution("factored", marginals=random_marginals(rng, cards))
    q = random_hypothesis(rng, cards)
    loss = LossFunction.misclassification(2)
    exact = evaluate_risk(q, loss, cond, inp, RiskConfig(cell_budget=9))
    assert exact.n_samples is None
    sampled = evaluate_risk(q, loss, cond, inp,
                            RiskConfig(cell_budget=8, n_samples=300))
    assert sampled.n_samples == 300
    with pytest.raises(EnumerationOverflowError, match="budget"):
        evaluate_risk(q, loss, cond, inp,
                      RiskConfig(cell_budget=8, sampling_enabled=False))


def test_sampling_seed_extra_changes_stream():
    rng = np.random.default_rng(12)
    cards = [3, 3]
    cond = random_conditional(rng, cards)
    inp = InputDistribution("factored", marginals=random_marginals(rng, cards))
    q = random_hypothesis(rng, cards)
    loss = LossFunction.misclassification(2)
    cfg = RiskConfig(cell_budget=1, n_samples=200)
    a = evaluate_risk(q, loss, cond, inp, cfg, seed_extra=1)
    b = evaluate_risk(q, loss, cond, inp, cfg, seed_extra=1)
    c = evaluate_risk(q, loss, cond, inp, cfg, seed_extra=2)
    assert a.value == b.value
    assert a.value != c.value


def test_sampled_risk_input_validation():
    rng = np.random.default_rng(13)
    cards = [2]
    cond = random_conditional(rng, cards)
    q = random_hypothesis(rng, cards)
    loss = LossFunction.misclassification(2)
    joint = random_joint_input(rng, cards)
    with pytest.raises(ValueError, match="factored"):
        evaluate_risk_sampled(q, loss, cond, joint, 100, seed=0)
    factored = InputDistribution("factored",
                                 marginals=(prob_vector(rng, 2),))
    with pytest.raises(ValueError, match="n_samples"):
        evaluate_risk_sampled(q, loss, cond, factored, 0, seed=0)
