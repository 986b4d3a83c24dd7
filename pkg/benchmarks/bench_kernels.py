"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--m 1000000] [--n 50] [--repeat 5]

Both backends are imported directly, so the env flag is not needed here.
Results are also checked for bit equality.
"""

import argparse
import time

import numpy as np

from capalloc._kernels import _numba, _numpy


def best_of(fn, args, repeat):
    fn(*args)  # warm-up, triggers compilation on the numba side
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--m", type=int, default=1_000_000, help="number of scenarios")
    ap.add_argument("--n", type=int, default=50, help="number of positions")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    positions = rng.normal(size=(args.n, args.m))
    u = rng.uniform(0.5, 1.5, size=args.n)
    probs = rng.dirichlet(np.ones(args.m))
    x = np.sort(positions[0])
    upper = np.concatenate(([1.0], 1.0 - np.cumsum(probs)[:-1]))
    dist = np.sqrt(np.clip(upper, 0.0, 1.0))

    cases = [
        ("aggregate", (positions, u)),
        ("weighted_sum", (probs, positions[0])),
        ("cumulative", (probs,)),
        ("tail_weights", (probs, 0.25)),
        ("choquet_sorted", (x, dist)),
    ]
    print(f"m={args.m} n={args.n} repeat={args.repeat}")
    print(f"{'kernel':>15}  {'numpy [ms]':>11}  {'numba [ms]':>11}  {'speedup':>8}  identical")
    for name, a in cases:
        f_np, f_nb = getattr(_numpy, name), getattr(_numba, name)
        t_np = best_of(f_np, a, args.repeat)
        t_nb = best_of(f_nb, a, args.repeat)
        same = np.array_equal(np.asarray(f_np(*a)), np.asarray(f_nb(*a)))
        print(f"{name:>15}  {1e3 * t_np:11.3f}  {1e3 * t_nb:11.3f}  {t_np / t_nb:8.2f}  {same}")


if __name__ == "__main__":
    main()
