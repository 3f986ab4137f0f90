"""Compare the compiled and pure-numpy kernel variants.

Usage: python3 benchmarks/bench_kernels.py [--rows N] [--repeat R]

Times the three hot kernels (tree prediction, expected cell loss, product of
marginals) in both implementations and prints a small table. Running with
DRIFTSHAP_NO_NUMBA=1 is not needed here: both variants are imported directly.
"""
import argparse
import time

import numpy as np

from driftshap import kernels


def _timeit(fn, repeat: int) -> float:
    fn()  # warmup (includes jit compilation for the compiled variants)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _build_tree_inputs(rng, rows: int):
    # a bushy fixed tree over 8 features with 10 bins each
    feature, threshold, left, right, leaf = [], [], [], [], []

    def build(depth):
        idx = len(leaf)
        for arr in (feature, threshold, left, right, leaf):
            arr.append(-1)
        if depth == 0:
            leaf[idx] = int(rng.integers(0, 2))
        else:
            feature[idx] = int(rng.integers(0, 8))
            threshold[idx] = int(rng.integers(0, 9))
            left[idx] = build(depth - 1)
            right[idx] = build(depth - 1)
        return idx

    build(6)
    cells = rng.integers(0, 10, size=(rows, 8)).astype(np.int64)
    return (cells, np.array(feature, dtype=np.int64),
            np.array(threshold, dtype=np.int64), np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64), np.array(leaf, dtype=np.int64))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not kernels.NUMBA_ENABLED:
        raise SystemExit("numba is disabled (DRIFTSHAP_NO_NUMBA); nothing to compare")

    rng = np.random.default_rng(0)
    rows = args.rows

    tree_args = _build_tree_inputs(rng, rows)

    n_classes = 4
    cond = rng.random((rows, n_classes))
    cond /= cond.sum(axis=1, keepdims=True)
    loss = rng.uniform(0.0, 3.0, size=(n_classes, n_classes))
    np.fill_diagonal(loss, 0.0)
    loss_by_pred = np.ascontiguousarray(loss.T)
    pred = rng.integers(0, n_classes, size=rows)

    marginals = [rng.dirichlet(np.ones(10)) for _ in range(6)]  # 10^6 cells

    cases = [
        ("tree_predict", lambda: kernels.tree_predict_np(*tree_args),
         lambda: kernels.tree_predict_nb(*tree_args)),
        ("expected_cell_loss",
         lambda: kernels.expected_cell_loss_np(cond, loss_by_pred, pred),
         lambda: kernels.expected_cell_loss_nb(cond, loss_by_pred, pred)),
        ("product_probs", lambda: kernels.product_probs_np(marginals),
         lambda: kernels.product_probs_nb(marginals)),
    ]

    print(f"{'kernel':<20} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for name, np_fn, nb_fn in cases:
        assert np.allclose(np_fn(), nb_fn()), name
        t_np = _timeit(np_fn, args.repeat) * 1000
        t_nb = _timeit(nb_fn, args.repeat) * 1000
        print(f"{name:<20} {t_np:>12.3f} {t_nb:>12.3f} {t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
