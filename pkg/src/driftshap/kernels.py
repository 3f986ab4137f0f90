"""Hot numeric kernels with numba-compiled and pure-numpy variants.

The compiled path is used when numba imports cleanly; setting the environment
variable DRIFTSHAP_NO_NUMBA=1 forces the numpy fallback (useful for debugging
and for the benchmark in benchmarks/bench_kernels.py, which times both).
"""
from __future__ import annotations

import os
from functools import reduce

import numpy as np


def _flag_disabled() -> bool:
    return os.environ.get("DRIFTSHAP_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}


NUMBA_ENABLED = False
if not _flag_disabled():
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass


def tree_predict_np(cells, feature, threshold, left, right, leaf):
    """Batch-predict classes for (n, k) integer cells with a flattened tree."""
    n = cells.shape[0]
    node = np.zeros(n, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    active = np.arange(n)
    while active.size:
        cur = node[active]
        at_leaf = leaf[cur] >= 0
        done = active[at_leaf]
        out[done] = leaf[node[done]]
        active = active[~at_leaf]
        if not active.size:
            break
        cur = node[active]
        go_left = cells[active, feature[cur]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
    return out


def expected_cell_loss_np(cond, loss_by_pred, pred):
    """Per-cell expected loss: sum_y cond[c, y] * loss[y, pred[c]].

    loss_by_pred is the loss matrix transposed, i.e. loss_by_pred[p, y] = L(actual=y, predicted=p).
    """
    return np.einsum("my,my->m", cond, loss_by_pred[pred])


def product_probs_np(marginals):
    """Cell probabilities over the full product domain, C-ordered (first feature slowest)."""
    if len(marginals) == 1:
        return np.asarray(marginals[0], dtype=np.float64).copy()
    return reduce(np.multiply.outer, [np.asarray(m, dtype=np.float64) for m in marginals]).ravel()


if NUMBA_ENABLED:

    @_njit(cache=True)
    def _tree_predict_nb(cells, feature, threshold, left, right, leaf):
        n = cells.shape[0]
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            node = 0
            while leaf[node] < 0:
                if cells[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = leaf[node]
        return out

    @_njit(cache=True)
    def _expected_cell_loss_nb(cond, loss_by_pred, pred):
        m, c = cond.shape
        out = np.empty(m, dtype=np.float64)
        for i in range(m):
            acc = 0.0
            row = loss_by_pred[pred[i]]
            for y in range(c):
                acc += cond[i, y] * row[y]
            out[i] = acc
        return out

    @_njit(cache=True)
    def _product_probs_nb(flat, offsets, cards):
        k = cards.shape[0]
        n_cells = 1
        for j in range(k):
            n_cells *= cards[j]
        out = np.empty(n_cells, dtype=np.float64)
        idx = np.zeros(k, dtype=np.int64)
        for c in range(n_cells):
            p = 1.0
            for j in range(k):
                p *= flat[offsets[j] + idx[j]]
            out[c] = p
            # mixed-radix increment, last feature fastest (C order)
            for j in range(k - 1, -1, -1):
                idx[j] += 1
                if idx[j] < cards[j]:
                    break
                idx[j] = 0
        return out

    def tree_predict_nb(cells, feature, threshold, left, right, leaf):
        return _tree_predict_nb(
            np.ascontiguousarray(cells, dtype=np.int64),
            feature, threshold, left, right, leaf,
        )

    def expected_cell_loss_nb(cond, loss_by_pred, pred):
        return _expected_cell_loss_nb(
            np.ascontiguousarray(cond, dtype=np.float64),
            np.ascontiguousarray(loss_by_pred, dtype=np.float64),
            np.ascontiguousarray(pred, dtype=np.int64),
        )

    def product_probs_nb(marginals):
        flat = np.concatenate([np.asarray(m, dtype=np.float64) for m in marginals])
        cards = np.array([len(m) for m in marginals], dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(cards)[:-1]))
        return _product_probs_nb(flat, offsets, cards)

    tree_predict = tree_predict_nb
    expected_cell_loss = expected_cell_loss_nb
    product_probs = product_probs_nb
else:
    tree_predict = tree_predict_np
    expected_cell_loss = expected_cell_loss_np
    product_probs = product_probs_np
