"""Risk evaluation for a hypothesis under (possibly hybrid) distribution pairs.

Joint inputs are evaluated exactly over their support. Factored inputs are
enumerated exactly over the full product domain while it fits the configured
cell budget, and estimated by seeded Monte Carlo sampling beyond it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EnumerationOverflowError
from .hypotheses import Hypothesis, LossFunction
from .tables import ConditionalTable, InputDistribution


@dataclass(frozen=True)
class RiskConfig:
    cell_budget: int = 1_000_000
    sampling_enabled: bool = True
    n_samples: int = 100_000
    seed: int = 0


@dataclass(frozen=True)
class RiskValue:
    value: float
    support_mass: float    # input mass actually enumerated
    fallback_mass: float   # mass answered by the conditional's class prior
    stderr: float | None = None
    n_samples: int | None = None


def _cell_losses(q: Hypothesis, loss: LossFunction, cond_arr, cells) -> np.ndarray:
    pred = q.predict_cells(cells)
    loss_by_pred = np.ascontiguousarray(loss.matrix.T)
    return kernels.expected_cell_loss(np.ascontiguousarray(cond_arr, dtype=np.float64),
                                      loss_by_pred, pred)


def _evaluate_joint(q, loss, cond: ConditionalTable, inp: InputDistribution) -> RiskValue:
    items = sorted(inp.table.items())
    cells = np.array([c for c, _ in items], dtype=np.int64)
    probs = np.array([p for _, p in items], dtype=np.float64)
    cond_arr = np.empty((len(items), cond.n_classes), dtype=np.float64)
    fallback = np.zeros(len(items), dtype=bool)
    for i, (c, _) in enumerate(items):
        vec, fb = cond.probs(c)
        cond_arr[i] = vec
        fallback[i] = fb
    el = _cell_losses(q, loss, cond_arr, cells)
    return RiskValue(value=float(np.dot(probs, el)),
                     support_mass=float(probs.sum()),
                     fallback_mass=float(probs[fallback].sum()))


def _rank(cell, cards) -> int:
    r = 0
    for idx, card in zip(cell, cards):
        r = r * card + idx
    return r


def _evaluate_factored_exact(q, loss, cond: ConditionalTable,
                             inp: InputDistribution) -> RiskValue:
    cards = [len(m) for m in inp.marginals]
    n_cells = int(np.prod(cards))
    probs = kernels.product_probs(inp.marginals)
    cells = np.indices(cards).reshape(len(cards), -1).T
    cond_arr = np.tile(cond.class_prior, (n_cells, 1))
    fallback = np.ones(n_cells, dtype=bool)
    for cell, vec in cond.entries.items():
        r = _rank(cell, cards)
        cond_arr[r] = vec
        fallback[r] = False
    el = _cell_losses(q, loss, cond_arr, cells)
    return RiskValue(value=float(np.dot(probs, el)),
                     support_mass=float(probs.sum()),
                     fallback_mass=float(probs[fallback].sum()))


def evaluate_risk_sampled(q: Hypothesis, loss: LossFunction, cond: ConditionalTable,
                          inp: InputDistribution, n_samples: int, seed) -> RiskValue:
    """Monte-Carlo risk over a factored input; deterministic for a fixed seed."""
    if inp.form != "factored":
        raise ValueError("sampled risk needs a factored input")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    k = len(inp.marginals)
    cells = np.empty((n_samples, k), dtype=np.int64)
    for j, m in enumerate(inp.marginals):
        cells[:, j] = rng.choice(len(m), size=n_samples, p=np.asarray(m) / np.sum(m))
    pred = q.predict_cells(cells)
    cond_arr = np.empty((n_samples, cond.n_classes), dtype=np.float64)
    fallback = np.zeros(n_samples, dtype=bool)
    entries = cond.entries
    prior = cond.class_prior
    for i, row in enumerate(map(tuple, cells.tolist())):
        vec = entries.get(row)
        if vec is None:
            cond_arr[i] = prior
            fallback[i] = True
        else:
            cond_arr[i] = vec
    cdf = np.cumsum(cond_arr, axis=1)
    u = rng.random(n_samples)
    ys = np.minimum((u[:, None] > cdf).sum(axis=1), cond.n_classes - 1)
    losses = loss.matrix[ys, pred]
    value = float(losses.mean())
    stderr = float(losses.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return RiskValue(value=value, support_mass=1.0,
                     fallback_mass=float(fallback.mean()),
                     stderr=stderr, n_samples=n_samples)


def evaluate_risk(q: Hypothesis, loss: LossFunction, cond: ConditionalTable,
                  inp: InputDistribution, config: RiskConfig = RiskConfig(),
                  seed_extra: int = 0) -> RiskValue:
    """Exact risk when the enumeration domain fits the budget, sampled otherwise.

    seed_extra is folded into the sampling seed so distinct coalitions draw
    independent, reproducible streams.
    """
    if inp.form == "joint":
        return _evaluate_joint(q, loss, cond, inp)
    if inp.n_cells <= config.cell_budget:
        return _evaluate_factored_exact(q, loss, cond, inp)
    if not config.sampling_enabled:
        raise EnumerationOverflowError(
            f"factored domain has {inp.n_cells} cells, over the budget of "
            f"{config.cell_budget}, and sampling is disabled")
    return evaluate_risk_sampled(q, loss, cond, inp, config.n_samples,
                                 seed=[config.seed, seed_extra])
