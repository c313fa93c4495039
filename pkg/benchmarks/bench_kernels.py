"""Benchmark the numba kernels against the pure-numpy fallbacks.

The package selects its kernel implementations at import time from the
``SHELAB_NO_NUMBA`` environment variable, so the two paths have to live in
separate interpreter processes.  This script re-executes itself once per
backend, times each kernel on a fixed workload, and prints a comparison
table with speedups.

Usage::

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time

_WORKER_FLAG = "--worker"


def _bench_once(repeats: int) -> dict:
    import numpy as np

    from shelab import _accel

    rng = np.random.default_rng(12345)
    results = {"backend": "numba" if _accel.USING_NUMBA else "numpy"}

    def timeit(name, fn, *args):
        fn(*args)  # warm-up (includes jit compilation)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn(*args)
            best = min(best, time.perf_counter() - t0)
        results[name] = best

    # explicit Euler: 64 cells, 2 components, 2048 steps
    u = np.zeros((64, 2))
    noise = rng.standard_normal((2048, 64, 2))
    out = np.empty((2048, 2))
    timeit("euler_chunk", lambda: _accel.euler_chunk(
        u.copy(), noise, 1.0 / 16384.0, 1.0 / 64.0, 1, 0.0, 32, out))

    # OU mode recursion: 256 modes, 2 components, 2048 steps
    modes = np.zeros((256, 2))
    decay = np.exp(-rng.uniform(0.0, 1.0, 256))
    sd = rng.uniform(0.1, 1.0, 256)
    onoise = rng.standard_normal((2048, 256, 2))
    weights = rng.standard_normal(256)
    oout = np.empty((2048, 2))
    timeit("ou_chunk", lambda: _accel.ou_chunk(
        modes.copy(), decay, sd, onoise, weights, oout))

    # pairwise small-ball counting: 2000 states in d = 2
    states = rng.standard_normal((2000, 2))
    eps2 = np.geomspace(1e-3, 1.0, 8)
    timeit("pair_counts", lambda: _accel.pair_counts(states, eps2, 4))

    # Fourier functional: 4096 time points, 512 frequencies, d = 1
    path = rng.standard_normal((4096, 1))
    xis = np.linspace(-40.0, 40.0, 512)[:, None]
    timeit("fourier_sums", lambda: _accel.fourier_sums(path, xis, 1e-3))

    # lattice KDE: 4000 samples on an 81-point lattice, d = 1
    samples = rng.standard_normal((4000, 1))
    lattice = np.linspace(-3.0, 3.0, 81)[:, None]
    timeit("kde_lattice", lambda: _accel.kde_lattice(samples, lattice, 0.15))

    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions per kernel (best is kept)")
    parser.add_argument(_WORKER_FLAG, action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        json.dump(_bench_once(args.repeats), sys.stdout)
        return 0

    rows = {}
    for backend, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, SHELAB_NO_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), _WORKER_FLAG,
             "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True, check=True,
        )
        payload = json.loads(proc.stdout)
        assert payload.pop("backend") == backend or backend == "numba", (
            "numba unavailable; both columns use the numpy fallback")
        rows[backend] = payload

    names = sorted(rows["numpy"])
    print(f"{'kernel':<14} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    for name in names:
        tj = rows["numba"][name] * 1e3
        tp = rows["numpy"][name] * 1e3
        print(f"{name:<14} {tj:>12.3f} {tp:>12.3f} {tp / tj:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
