"""Time the compiled and numpy trial kernels on identical work and check they agree.

Usage: python3 benchmarks/bench_kernels.py [--trials 200000] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from spinest import kernels
from spinest.montecarlo import TrialPlan, simulate_trials

CASES = [
    ("sep-unbiased", 5, 0.3),
    ("joint-biased", 10, math.pi / 6),
    ("three-joint", 4, None),
]


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    names = sorted(kernels.BACKENDS)
    print(f"backends available: {', '.join(names)} (default {kernels.BACKEND})")
    print(f"{'strategy':<16}{'N':>4}" + "".join(f"{n + ' [s]':>16}" for n in names) + f"{'speedup':>10}{'identical':>11}")
    for strategy, n, eta in CASES:
        results = {}
        for name in names:
            plan = TrialPlan(strategy, n, 1, 1, eta=eta, backend=name)
            results[name] = best_time(lambda: simulate_trials(plan, 0, args.trials), args.repeat)
        row = f"{strategy:<16}{n:>4}" + "".join(f"{results[k][0]:>16.4f}" for k in names)
        if len(names) == 2:
            (_, (sc, uc)), (_, (sp, up)) = results["cython"], results["python"]
            same = np.array_equal(uc, up) and np.allclose(sc, sp, rtol=0, atol=1e-15)
            row += f"{results['python'][0] / results['cython'][0]:>10.1f}x{str(same):>10}"
        print(row)


if __name__ == "__main__":
    main()
