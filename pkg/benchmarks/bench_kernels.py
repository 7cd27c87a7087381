"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--points 32768]

Each row checks that both versions agree before timing them. The numba
timings exclude compilation (one warm-up call).
"""

import argparse
import time

import numpy as np

from bellforge import kernels
from bellforge._accel import NUMBA_AVAILABLE
from bellforge.inequalities import mabk


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        func()
        times.append(time.perf_counter() - start)
    return min(times)


def grid_cases(points, rng):
    for n in (3, 5, 8):
        coeffs = mabk(n).as_array().astype(complex)
        thetas = rng.uniform(-np.pi, np.pi, size=(points, n))
        yield f"pair objective n={n}", (
            lambda c=coeffs, t=thetas: kernels.pair_objective_batch_numba(c, t),
            lambda c=coeffs, t=thetas: kernels.pair_objective_batch_numpy(c, t),
        )
        yield f"anti-diagonal n={n}", (
            lambda c=coeffs, t=thetas: kernels.antidiagonal_batch_numba(c, t),
            lambda c=coeffs, t=thetas: kernels.antidiagonal_batch_numpy(c, t),
        )


def scan_cases():
    for n in (6, 8, 10):
        numer, _ = mabk(n).numerators()
        yield f"strategy scan n={n}", (
            lambda v=numer, n=n: kernels.strategy_scan(v, n, use_numba=True)[0],
            lambda v=numer, n=n: kernels.strategy_scan(v, n, use_numba=False)[0],
        )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--points", type=int, default=32768)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<24}{'numba [ms]':>12}{'numpy [ms]':>12}{'speed-up':>10}")
    for name, (fast, slow) in list(grid_cases(args.points, rng)) + list(scan_cases()):
        a, b = np.asarray(fast()), np.asarray(slow())
        if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: numba and numpy disagree")
        t_fast = best_of(fast, args.repeat)
        t_slow = best_of(slow, args.repeat)
        print(f"{name:<24}{1e3 * t_fast:>12.2f}{1e3 * t_slow:>12.2f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
