"""Shapley attribution over surrogate-selected distribution components.

The value function maps a binary surrogate assignment to the risk of the fixed
hypothesis under the hybrid distribution it selects. Three estimators are
provided: full subset enumeration, the two-player closed form, and permutation
sampling whose per-permutation credits telescope to the total risk change.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import PlanMismatchError, TooManyPlayersError
from .hypotheses import Hypothesis, LossFunction
from .risk import RiskConfig, RiskValue, evaluate_risk
from .tables import FactorizationPlan, PopulationDistributions, assemble_hybrid

EXACT_K_LIMIT = 12


@dataclass(eq=False)
class DistributionValueFunction:
    """Memoized f'(s): risk of q under the hybrid distributions selected by s."""
    q: Hypothesis
    loss: LossFunction
    base: PopulationDistributions
    targ: PopulationDistributions
    plan: FactorizationPlan
    risk_config: RiskConfig = RiskConfig()
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return self.plan.k

    def _component_digest(self, pops: PopulationDistributions, player) -> bytes:
        h = hashlib.blake2b(digest_size=8)
        if player.kind == "conditional":
            for cell, vec in sorted(pops.conditional.entries.items()):
                h.update(repr(cell).encode())
                h.update(np.asarray(vec, dtype=np.float64).tobytes())
            h.update(np.asarray(pops.conditional.class_prior, dtype=np.float64).tobytes())
        elif player.kind == "input":
            for cell, p in sorted(pops.input.table.items()):
                h.update(repr(cell).encode())
                h.update(np.float64(p).tobytes())
        else:
            h.update(np.asarray(pops.input.marginals[player.feature],
                                dtype=np.float64).tobytes())
        return h.digest()

    def _digests(self):
        cached = getattr(self, "_digest_cache", None)
        if cached is None:
            cached = ([self._component_digest(self.base, p) for p in self.plan.players],
                      [self._component_digest(self.targ, p) for p in self.plan.players])
            self._digest_cache = cached
        return cached

    def _sampling_seed(self, bits) -> int:
        # Content-addressed: two assignments selecting identical component tables
        # draw the same stream, keeping null-player and swap symmetries exact
        # even when risks are sampled.
        base_d, targ_d = self._digests()
        h = hashlib.blake2b(digest_size=8)
        for i, b in enumerate(bits):
            h.update(targ_d[i] if b else base_d[i])
        return int.from_bytes(h.digest(), "big")

    def risk_at(self, bits) -> RiskValue:
        bits = tuple(int(b) for b in bits)
        cached = self._cache.get(bits)
        if cached is None:
            cond, inp = assemble_hybrid(self.base, self.targ, self.plan, bits)
            cached = evaluate_risk(self.q, self.loss, cond, inp, self.risk_config,
                                   seed_extra=self._sampling_seed(bits))
            self._cache[bits] = cached
        return cached

    def value(self, bits) -> float:
        return self.risk_at(bits).value


@dataclass(eq=False)
class AttributionReport:
    phi: dict                  # player name -> signed Shapley value
    risk_baseline: RiskValue
    risk_target: RiskValue
    efficiency_residual: float
    estimator: dict
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        def risk_doc(r: RiskValue) -> dict:
            return {"value": r.value, "support_mass": r.support_mass,
                    "fallback_mass": r.fallback_mass,
                    "stderr": r.stderr, "n_samples": r.n_samples}
        return {
            "phi": {name: float(v) for name, v in self.phi.items()},
            "risk_baseline": risk_doc(self.risk_baseline),
            "risk_target": risk_doc(self.risk_target),
            "efficiency_residual": float(self.efficiency_residual),
            "estimator": self.estimator,
            "diagnostics": self.diagnostics,
        }


def _bits(k: int, on) -> tuple:
    b = [0] * k
    for i in on:
        b[i] = 1
    return tuple(b)


def _finish(vf: DistributionValueFunction, phi: dict, estimator: dict,
            diagnostics: dict | None = None) -> AttributionReport:
    rb = vf.risk_at((0,) * vf.k)
    rt = vf.risk_at((1,) * vf.k)
    residual = (rt.value - rb.value) - math.fsum(phi.values())
    diag = dict(diagnostics or {})
    diag.setdefault("fallback_mass", {
        "baseline": rb.fallback_mass,
        "target": rt.fallback_mass,
        "max_over_coalitions": max(r.fallback_mass for r in vf._cache.values()),
    })
    return AttributionReport(phi=phi, risk_baseline=rb, risk_target=rt,
                             efficiency_residual=residual, estimator=estimator,
                             diagnostics=diag)


def shapley_exact(vf: DistributionValueFunction,
                  exact_k_limit: int = EXACT_K_LIMIT) -> AttributionReport:
    """Exact attributions by full subset enumeration (2^k memoized evaluations)."""
    k = vf.k
    if k > exact_k_limit:
        raise TooManyPlayersError(
            f"exact enumeration over {k} players exceeds the limit of "
            f"{exact_k_limit}; use the monte-carlo estimator")
    phi = {}
    for i, player in enumerate(vf.plan.players):
        others = [j for j in range(k) if j != i]
        terms = []
        for size in range(k):
            w = math.factorial(size) * math.factorial(k - size - 1) / math.factorial(k)
            for subset in combinations(others, size):
                with_i = vf.value(_bits(k, subset + (i,)))
                without_i = vf.value(_bits(k, subset))
                terms.append(w * (with_i - without_i))
        phi[player.name] = math.fsum(terms)
    return _finish(vf, phi, {"kind": "exact"})


def shapley_two_player(vf: DistributionValueFunction) -> AttributionReport:
    """Closed-form attributions for the conditional + joint-input split."""
    if vf.k != 2:
        raise PlanMismatchError(f"two-player closed form needs k=2, got k={vf.k}")
    v00 = vf.value((0, 0))
    v01 = vf.value((0, 1))
    v10 = vf.value((1, 0))
    v11 = vf.value((1, 1))
    cond_name = vf.plan.players[0].name
    input_name = vf.plan.players[1].name
    phi = {
        cond_name: 0.5 * (v10 + v11 - v00 - v01),
        input_name: 0.5 * (v01 + v11 - v00 - v10),
    }
    return _finish(vf, phi, {"kind": "two-player-closed-form"})


def shapley_monte_carlo(vf: DistributionValueFunction, n_permutations: int,
                        seed: int = 0) -> AttributionReport:
    """Permutation-sampling attributions with telescoping per-permutation credits."""
    if vf.k < 2:
        raise PlanMismatchError("monte-carlo estimator needs k >= 2")
    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    k = vf.k
    rng = np.random.default_rng(seed)
    credits = [[] for _ in range(k)]
    for _ in range(n_permutations):
        perm = rng.permutation(k)
        bits = [0] * k
        prev = vf.value(tuple(bits))
        for i in perm:
            bits[i] = 1
            cur = vf.value(tuple(bits))
            credits[int(i)].append(cur - prev)
            prev = cur
    phi, stderr = {}, {}
    for i, player in enumerate(vf.plan.players):
        c = credits[i]
        phi[player.name] = math.fsum(c) / n_permutations
        if n_permutations > 1:
            stderr[player.name] = float(np.std(c, ddof=1) / math.sqrt(n_permutations))
        else:
            stderr[player.name] = 0.0
    estimator = {"kind": "monte-carlo", "n_permutations": n_permutations,
                 "seed": seed, "stderr": stderr}
    return _finish(vf, phi, estimator)
