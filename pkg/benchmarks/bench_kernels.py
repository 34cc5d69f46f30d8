"""Wall clock of the oracle's Dormand-Prince kernel: numba vs. pure numpy.

Usage::

    python benchmarks/bench_kernels.py --r 2 4 8 --points 20 --repeats 3
"""

import argparse
import os
import statistics
import time

import numpy as np

from riccati_floquet import _accel, oracle
from riccati_floquet.randmodels import DEFAULT_SEED, random_model, random_psd


def timed(model, Q, grid, repeats):
    oracle.integrate_riccati(model, Q, grid[:1], with_transition=True)  # compile / warm
    runs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        traj = oracle.integrate_riccati(model, Q, grid, with_transition=True)
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs), traj


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--t-max", type=float, default=10.0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(DEFAULT_SEED)
    grid = np.linspace(args.t_max / args.points, args.t_max, args.points)
    print(f"{'r':>4} {'numba [s]':>11} {'numpy [s]':>11} {'speedup':>8} {'max diff':>10}")
    for r in args.r:
        model = random_model(rng, r)
        Q = random_psd(rng, r)
        os.environ.pop("RICCATI_NO_NUMBA", None)
        if not _accel.numba_enabled():
            raise SystemExit("numba is not installed; install the 'accel' extra")
        t_jit, a = timed(model, Q, grid, args.repeats)
        os.environ["RICCATI_NO_NUMBA"] = "1"
        try:
            t_py, b = timed(model, Q, grid, args.repeats)
        finally:
            os.environ.pop("RICCATI_NO_NUMBA", None)
        diff = max(np.max(np.abs(x - y)) for x, y in zip(a.values, b.values))
        print(f"{r:>4} {t_jit:>11.4f} {t_py:>11.4f} {t_py / t_jit:>8.1f} {diff:>10.1e}")


if __name__ == "__main__":
    main()
