"""Acceptance suite: the end-to-end guarantees the package is judged against.

Each test prints a single PASS line so the suite doubles as a checklist when
run with `pytest -v -s tests/test_acceptance.py`.
"""
import math
import time

import numpy as np
import pytest

from driftshap.bench import (
    attribute_scenario,
    run_synthetic_suite,
    synthetic_scenario,
    toy_raw_tables,
    toy_schema_dict,
    toy_value_function,
)
from driftshap.errors import TooManyPlayersError
from driftshap.pipeline import RunConfig, run_attribute
from driftshap.risk import RiskConfig, evaluate_risk
from driftshap.shapley import (
    shapley_exact,
    shapley_monte_carlo,
    shapley_two_player,
)

from conftest import (
    brute_force_joint_risk,
    random_instance,
    two_player_instance,
)

TOY_TOL = 1e-9

# Frozen expectations for the three toy scenarios (conditional phi, input phi,
# baseline risk, target risk).
TOY_REAL = (0.75, 0.0, 0.0, 0.75)
TOY_VIRTUAL = (0.0, 0.03, 0.75, 0.78)
TOY_COMBINED = (0.765, 0.015, 0.0, 0.78)


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    # Trigger one evaluation up front so jit compilation never lands inside a
    # timed section.
    shapley_two_player(toy_value_function("real-drift"))
    rep = attribute_scenario(
        synthetic_scenario("rbf", "concept-change", 0, 200, n_features=3),
        depth=2, estimator="mc", n_permutations=1,
        risk_config=RiskConfig(cell_budget=10, n_samples=100))
    assert rep.risk_baseline.value >= 0.0


def _check_toy(scenario: str, expected, label: str):
    start = time.perf_counter()
    rep = shapley_two_player(toy_value_function(scenario))
    elapsed = time.perf_counter() - start
    phi_cond, phi_input, rb, rt = expected
    assert abs(rep.phi["conditional"] - phi_cond) <= TOY_TOL
    assert abs(rep.phi["input"] - phi_input) <= TOY_TOL
    assert abs(rep.risk_baseline.value - rb) <= TOY_TOL
    assert abs(rep.risk_target.value - rt) <= TOY_TOL
    assert elapsed < 1.0
    print(f"PASS: {label} phi=({rep.phi['conditional']:.6f}, "
          f"{rep.phi['input']:.6f}) in {elapsed * 1000:.1f} ms")
    return rep


def test_toy_real_drift():
    _check_toy("real-drift", TOY_REAL, "toy real drift")


def test_toy_virtual_drift():
    _check_toy("virtual-drift", TOY_VIRTUAL, "toy virtual drift")


def test_toy_combined():
    rep = _check_toy("combined", TOY_COMBINED, "toy combined")
    assert abs((rep.risk_target.value - rep.risk_baseline.value) - 0.78) <= TOY_TOL


def test_toy_combined_via_csv_pipeline(tmp_path):
    base_raw, targ_raw = toy_raw_tables("combined")
    base_path = tmp_path / "baseline.csv"
    targ_path = tmp_path / "target.csv"
    base_raw.to_csv(base_path)
    targ_raw.to_csv(targ_path)
    cfg = RunConfig.from_dict({
        "baseline_path": str(base_path),
        "target_path": str(targ_path),
        "schema": toy_schema_dict(),
        "hypothesis": {"kind": "rule", "expression": "x1 and x2 and x3"},
        "factorization": "two-player",
    })
    doc = run_attribute(cfg)
    rep = doc.report
    assert abs(rep.phi["conditional"] - 0.765) <= TOY_TOL
    assert abs(rep.phi["input"] - 0.015) <= TOY_TOL
    assert abs(rep.risk_target.value - rep.risk_baseline.value - 0.78) <= TOY_TOL
    print("PASS: toy combined reproduced through the CSV ingestion pipeline")


def test_efficiency_on_random_instances():
    start = time.perf_counter()
    rng = np.random.default_rng(20260823)
    worst_exact = worst_mc = 0.0
    for trial in range(200):
        k = int(rng.integers(2, 7))
        vf = random_instance(rng, k)
        if k == 2 and not vf.plan.is_factored:
            rep = shapley_two_player(vf)
        else:
            rep = shapley_exact(vf)
        worst_exact = max(worst_exact, abs(rep.efficiency_residual))
        assert abs(rep.efficiency_residual) <= 1e-9
        if trial % 10 == 0:
            mc = shapley_monte_carlo(vf, 20, seed=trial)
            worst_mc = max(worst_mc, abs(mc.efficiency_residual))
            assert abs(mc.efficiency_residual) <= 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(f"PASS: efficiency on 200 instances "
          f"(worst exact residual {worst_exact:.2e}, worst sampled "
          f"{worst_mc:.2e}) in {elapsed:.1f} s")


def test_estimators_agree():
    rng = np.random.default_rng(7)
    for _ in range(30):
        vf = two_player_instance(rng)
        closed = shapley_two_player(vf)
        exact = shapley_exact(vf)
        for name in closed.phi:
            assert abs(closed.phi[name] - exact.phi[name]) <= 1e-12
    checked = 0
    for seed in range(20):
        vf = random_instance(rng, 4)
        exact = shapley_exact(vf)
        mc = shapley_monte_carlo(vf, 2000, seed=seed)
        for name in exact.phi:
            err = abs(mc.phi[name] - exact.phi[name])
            bound = max(3.0 * mc.estimator["stderr"][name], 1e-12)
            assert err <= bound
            checked += 1
    print(f"PASS: closed form matches enumeration; sampling within 3 stderr "
          f"on {checked} attributions")


def test_null_player_and_antisymmetry():
    rng = np.random.default_rng(99)
    sampled_cfg = RiskConfig(cell_budget=1, n_samples=400, seed=3)
    for trial in range(25):
        k = int(rng.integers(2, 6))
        null = int(rng.integers(0, k))
        cfg = sampled_cfg if trial % 5 == 4 else RiskConfig()
        vf = random_instance(rng, k, risk_config=cfg, share=(null,))
        rep = shapley_exact(vf)
        name = vf.plan.players[null].name
        assert rep.phi[name] == 0.0
        mc = shapley_monte_carlo(vf, 10, seed=trial)
        assert mc.phi[name] == 0.0
        flipped = shapley_exact(
            type(vf)(vf.q, vf.loss, vf.targ, vf.base, vf.plan, vf.risk_config))
        for pname in rep.phi:
            assert flipped.phi[pname] == -rep.phi[pname]
    print("PASS: null players get exactly 0; swapping populations exactly "
          "negates every attribution")


def test_synthetic_family_expectations():
    start = time.perf_counter()
    seeds = range(10)
    for family in ("stagger", "sea", "sine", "circle"):
        concept = run_synthetic_suite(family, "concept-change", seeds)
        dominates = sum(r["real_dominates"] for r in concept)
        assert dominates >= 9, (family, "concept-change", dominates)
        perturb = run_synthetic_suite(family, "feature-perturb", seeds)
        largest = sum(r["perturbed_is_largest"] for r in perturb)
        exceeds = sum(r["exceeds_concept_change"] for r in perturb)
        assert largest >= 9, (family, "largest", largest)
        assert exceeds >= 9, (family, "exceeds", exceeds)
        print(f"PASS: {family} concept-change {dominates}/10, "
              f"perturbed-largest {largest}/10, exceeds-reference {exceeds}/10")
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    print(f"PASS: synthetic suite in {elapsed:.1f} s")


def _timed_rbf_attribution(n_features: int) -> float:
    scn = synthetic_scenario("rbf", "concept-change", 0, 4000,
                             n_features=n_features)
    best = math.inf
    for _ in range(2):
        start = time.perf_counter()
        rep = attribute_scenario(scn, estimator="mc", n_permutations=5,
                                 risk_config=RiskConfig(n_samples=4000))
        best = min(best, time.perf_counter() - start)
        assert abs(rep.efficiency_residual) <= 1e-12
    return best


def test_sampling_scales_linearly_and_exact_refuses():
    # Warm caches (jit, tree training paths) before timing.
    _timed_rbf_attribution(9)
    times = {nf: _timed_rbf_attribution(nf) for nf in (9, 14, 19)}
    k0, t0 = 10, times[9]  # player count = features + 1
    for nf in (14, 19):
        k = nf + 1
        assert times[nf] <= 2.0 * (k / k0) * t0, (k, times[nf], t0)
    scn = synthetic_scenario("rbf", "concept-change", 0, 500, n_features=19)
    with pytest.raises(TooManyPlayersError, match="exceeds the limit"):
        attribute_scenario(scn, estimator="exact")
    ratios = {nf + 1: times[nf] / t0 for nf in (14, 19)}
    print(f"PASS: sampling time ratios vs k=10: {ratios} (bounds 3.0 / 4.0); "
          "exact estimator refused at k=20")


def test_joint_risk_matches_brute_force():
    rng = np.random.default_rng(123)
    worst = 0.0
    for _ in range(100):
        vf = two_player_instance(rng)
        for pops in (vf.base, vf.targ):
            got = evaluate_risk(vf.q, vf.loss, pops.conditional, pops.input)
            want = brute_force_joint_risk(vf.q, vf.loss, pops.conditional,
                                          pops.input)
            worst = max(worst, abs(got.value - want))
            assert abs(got.value - want) <= 1e-12
    print(f"PASS: joint risk matches brute-force double sum "
          f"(worst |delta| {worst:.2e})")
