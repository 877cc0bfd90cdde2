"""Compare the numba and numpy per-column class-count kernels.

    python benchmarks/bench_kernels.py [--apps 20000] [--features 3000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from manifest_ig import _kernels
from manifest_ig.ig import score_matrix


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--apps", type=int, default=20000)
    ap.add_argument("--features", type=int, default=3000)
    ap.add_argument("--density", type=float, default=0.05)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    matrix = (rng.random((args.apps, args.features)) < args.density).astype(np.uint8)
    labels = (rng.random(args.apps) < 0.5).astype(np.uint8)
    print(f"matrix {args.apps} x {args.features}, density {args.density}")

    backends = ["numpy"]
    if _kernels.class_counts_numba is not None:
        _kernels.class_counts(matrix[:2], labels[:2], "numba")  # compile outside the timing
        backends.append("numba")
    else:
        print("numba not available; timing numpy only")

    results = {}
    for b in backends:
        counts = best_of(lambda: _kernels.class_counts(matrix, labels, b), args.repeat)
        full = best_of(lambda: score_matrix(matrix, labels, b), args.repeat)
        results[b] = score_matrix(matrix, labels, b)
        print(f"{b:>6}: counts {counts * 1e3:8.2f} ms   full scoring {full * 1e3:8.2f} ms")
    if len(results) == 2:
        a, c = results["numpy"], results["numba"]
        same = a[0] == c[0] and all(np.array_equal(x, y) for x, y in zip(a[1:], c[1:]))
        print(f"outputs bit-identical: {same}")


if __name__ == "__main__":
    main()
